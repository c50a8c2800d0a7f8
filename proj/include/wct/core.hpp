#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wct {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RefusalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Relative slack used when snapping reals onto (1+delta)^k boundaries.
inline constexpr double kSnap = 1e-12;
// Absolute-plus-relative tolerance for cost comparisons.
inline constexpr double kCostTol = 1e-9;

bool approx_le(double a, double b, double tol = kCostTol);
bool approx_eq(double a, double b, double tol = kCostTol);

// An integer power of (1+delta). The base lives in Geo.
struct GeoValue {
    int64_t exponent = 0;

    friend GeoValue operator*(GeoValue a, GeoValue b) { return {a.exponent + b.exponent}; }
    friend GeoValue operator/(GeoValue a, GeoValue b) { return {a.exponent - b.exponent}; }
    friend auto operator<=>(GeoValue a, GeoValue b) = default;
};

// Arithmetic on powers of (1+delta).
class Geo {
public:
    explicit Geo(double delta);

    double delta() const { return delta_; }
    double base() const { return 1.0 + delta_; }
    double log_base() const { return log_base_; }

    double value(int64_t e) const;
    double value(GeoValue g) const { return value(g.exponent); }

    // Smallest e with (1+delta)^e >= x.
    int64_t ceil_log(double x) const;
    // Largest e with (1+delta)^e <= x.
    int64_t floor_log(double x) const;
    // Index i of the window [(1+delta)^i, (1+delta)^{i+1}) holding x > 0.
    int64_t interval_index(double x) const { return floor_log(x); }
    // Exact log when x is a power of the base, otherwise nullopt.
    std::optional<int64_t> exact_log(double x) const;

private:
    double delta_;
    double log_base_;
};

struct Job {
    int id = 0;
    double size = 1;
    double weight = 1;
    double release = 0;
    // Exponents, meaningful when the owning instance is rounded.
    GeoValue size_e;
    GeoValue weight_e;
    GeoValue release_e;

    double density() const { return weight / size; }
    int64_t density_exp() const { return weight_e.exponent - size_e.exponent; }
};

struct Machine {
    int id = 0;
    double speed = 1;
    GeoValue speed_e;
};

struct Instance {
    std::vector<Job> jobs;
    std::vector<Machine> machines;
    bool has_release = false;
    // Positive when every field is a power of (1+rounded_delta).
    double rounded_delta = 0;

    int n() const { return static_cast<int>(jobs.size()); }
    int m() const { return static_cast<int>(machines.size()); }
    bool rounded() const { return rounded_delta > 0; }
    void check() const;
};

// Job indices (positions in Instance::jobs) per machine, run back to back from time 0.
struct OrderedSchedule {
    std::vector<std::vector<int>> machines;
};

struct Slot {
    int machine = -1;
    double completion = 0;
};

// Per job index: machine and completion time.
struct TimedSchedule {
    std::vector<Slot> slots;
};

enum class Functional { cost, gamma_sum, u_cost, pseudo_cost };

struct CostReport {
    Functional kind = Functional::cost;
    double total = 0;
    std::vector<double> per_job;
    std::map<int64_t, double> per_interval;
};

// Sort job indices by density non-increasing, size non-increasing, id increasing.
std::vector<int> natural_order(const std::vector<Job>& jobs, std::vector<int> idx);
std::vector<Job> natural_order(std::vector<Job> jobs);
// Same ordering rule, comparing exponents of a rounded instance exactly.
bool natural_less(const Job& a, const Job& b);

void validate(const Instance& inst, const OrderedSchedule& s);
void validate(const Instance& inst, const TimedSchedule& s);

CostReport cost(const Instance& inst, const OrderedSchedule& s);
CostReport cost(const Instance& inst, const TimedSchedule& s);
// Completion times implied by an ordered schedule.
TimedSchedule to_timed(const Instance& inst, const OrderedSchedule& s);
// Machine lists sorted by completion time.
OrderedSchedule to_ordered(const Instance& inst, const TimedSchedule& s);
// Re-sort every machine by natural order.
OrderedSchedule naturalize(const Instance& inst, OrderedSchedule s);

double gamma_value(const Job& job, double completion, double speed);
double gamma_lower_bound(const std::vector<Job>& jobs, double speed);
double block_gamma(double total_size, double density, double start, double speed);
// jobs run back to back in the given order from time 0.
double u_cost(const std::vector<Job>& ordered, double threshold, double speed);
double machine_cost(const std::vector<Job>& ordered, double speed);
double gamma_sum(const std::vector<Job>& ordered, double speed);

CostReport pseudo_cost(const Instance& inst, const TimedSchedule& s, const Geo& geo);

struct TimelyCheck {
    bool timely = true;
    int job = -1;
    double start = 0;
    double required = 0;
};
TimelyCheck is_timely(const Instance& inst, const TimedSchedule& s, double delta);

double start_time(const Instance& inst, const TimedSchedule& s, int j);

// FNV-1a over the instance fields, as 16 hex digits.
std::string instance_hash(const Instance& inst);

}  // namespace wct
