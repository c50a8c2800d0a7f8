#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wct/core.hpp"

namespace wct {

// Time window J_{i,l} = [(1+d)^i, (1+d)^{i+1}) on machine l.
struct IntervalKey {
    int64_t i = 0;
    int machine = 0;
    double length = 0;  // Z = s_l d (1+d)^i, in size units
    int64_t theta = 0;  // smallest release exponent of the instance
};

// Smallest release exponent; the instance must be rounded.
int64_t min_release_exp(const Instance& inst);
IntervalKey interval_key(const Instance& inst, int machine, int64_t i);

TimedSchedule time_augment(const TimedSchedule& s, double upsilon);

// Instance with every size multiplied by (1+d).
Instance stretched_instance(const Instance& inst);
// Every start and completion moved from J_i to J_{i+1}: all times scale by (1+d).
TimedSchedule shift_schedule(const Instance& inst, const TimedSchedule& s);

struct ListedJob {
    int start_machine = 0;
    int64_t start_i = 0;
    int end_machine = 0;
    int64_t end_i = 0;
};

struct IntervalList {
    std::vector<ListedJob> jobs;  // per job index

    struct Cell {
        std::vector<int> starting;
        std::vector<int> completing;
    };
    // (machine, i) -> jobs starting and completing there
    std::map<std::pair<int, int64_t>, Cell> cells() const;
    IntervalList shifted(int64_t by) const;
};

IntervalList list_from_schedule(const Instance& inst, const TimedSchedule& s);

struct ListCheck {
    bool ok = true;
    int condition = 0;  // 1..4
    int machine = -1;
    int64_t interval = 0;
    int job = -1;
    std::string message;
};

ListCheck check_list(const Instance& inst, const IntervalList& list);

// Thrown by schedule_from_list when the list breaks a condition.
struct ListViolation : ValidationError {
    ListCheck check;
    explicit ListViolation(ListCheck c) : ValidationError(c.message), check(std::move(c)) {}
};

// Sweep over intervals in increasing order per machine. With timely_delta > 0
// a crossing job is also held back until it starts at or after d p/s.
TimedSchedule schedule_from_list(const Instance& inst, const IntervalList& list, double timely_delta = 0);

struct StretchedJob {
    int machine = 0;
    double reserved_start = 0, reserved_end = 0;
    double basic_start = 0, basic_end = 0;
    double actual_start = 0, actual_end = 0;
};

struct GapRecord {
    double idle = 0;      // idle time inside the window times the speed
    double required = 0;  // d^3 Z
    bool covered = false; // inside a single reserved window
    double first_idle = 0;
};

struct StretchedSchedule {
    std::vector<StretchedJob> jobs;
    std::map<std::pair<int, int64_t>, GapRecord> gaps;  // (machine, i)
    int overflows = 0;      // packed blocks running past their limit
    int small_violations = 0;
    double input_pseudo_cost = 0;
    double output_pseudo_cost = 0;

    TimedSchedule actual() const;
    // Windows not covered by a reserved window whose idle part is below d^3 Z.
    std::vector<std::pair<int, int64_t>> short_gaps() const;
};

StretchedSchedule time_stretch(const Instance& inst, const TimedSchedule& s, double delta);

// Interval i' of the stretched schedule on `machine` with a qualifying gap and
// [(1+d)^{i'}, (1+d)^{i'+1}) inside [(1+d)^{i+1}, (1+d)^i / d^2).
std::optional<int64_t> gap_witness(const StretchedSchedule& st, int machine, int64_t i, double delta);

enum class JobClass { small, medium, large, huge };
std::string to_string(JobClass c);

JobClass classify_job(double size, const IntervalKey& key, double delta);
inline bool is_big(JobClass c) { return c == JobClass::medium || c == JobClass::large; }

struct OrganizedCheck {
    bool organized = true;
    std::string condition;  // "timely", "1", "2a", "2b", "2c"
    int j1 = -1, j2 = -1;
};

// `pseudo` carries pseudo-sizes and the rounded exponents of A'.
OrganizedCheck is_organized(const Instance& pseudo, const TimedSchedule& s);

// Swap jobs of equal size and density so that release dates, then reversed
// indices, follow the order of their start windows. Used for test fixtures.
TimedSchedule organize_equal_jobs(const Instance& pseudo, const TimedSchedule& s);

struct SelectionRecord {
    int64_t density = 0;
    int64_t i = 0;
    int machine = 0;
    int jobs = 0;
    double total = 0;  // selected size
    double bound = 0;  // Z / d^23
};

struct JobShiftResult {
    Instance shifted;                      // releases raised, everything else unchanged
    std::vector<int> selected_machine;     // per job, the machine of the step that selected it
    std::vector<SelectionRecord> ledger;
    bool within_bound = true;
};

JobShiftResult job_shift(const Instance& inst);

struct PackResult {
    TimedSchedule fragment;  // machine -1 for jobs outside the batch
    double finish = 0;
    double bound = 0;
    bool ok = true;
};

// Run each batch job on the machine that selected it, back to back from t.
// first_form: every job has release exactly r; otherwise releases are <= r.
PackResult pack_release_batch(const Instance& shifted, const std::vector<int>& selected_machine,
                              const std::vector<int>& jobs, double r, double t, double y_hat, bool first_form);

}  // namespace wct
