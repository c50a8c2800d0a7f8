#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wct/core.hpp"
#include "wct/milp.hpp"
#include "wct/rounding.hpp"

namespace wct {

struct NRParams {
    double delta = 0.125;
    int64_t y = 0;
    double gamma = 0;
    int64_t g_delta = 0;
    int64_t f_delta = 0;
    size_t config_cap = 1000000;
    MilpBudget budget;

    static NRParams from(const ParamPack& p);
    Geo geo() const { return Geo(delta); }
    // ceil(log_{1+delta} gamma)
    int64_t log_gamma() const;
};

// (density exponent r, size exponent i)
using JobType = std::pair<int64_t, int64_t>;

struct ConfigurationNR {
    int64_t j1 = 0;
    int64_t j2 = 0;
    std::map<JobType, int> large;        // n_{r,i}(C)
    std::map<int64_t, int64_t> small;    // t_r(C), only nonzero entries
    double work = 0;                     // sum of large sizes plus t_r U
    double unit = 0;                     // U(C) = gamma (1+delta)^{j1-1}
    bool heavy = false;
    bool fast = false;

    int64_t j3() const { return j1 - j2; }
    bool integral() const { return heavy || fast; }
};

struct ScaleGuess {
    int job = 0;        // index into the instance
    int64_t b = 1;
    double lo = 0, hi = 0;  // D_{j,b} = [lo, hi)
    int64_t shift = 0;  // sizes are divided by (1+delta)^shift
};

std::vector<ScaleGuess> scale_guesses(const Instance& band, const NRParams& p);

// Rounded band instance with sizes divided by (1+delta)^shift, the fastest
// speed at exponent 0 and the smallest density exponent at 0.
Instance scale_instance(const Instance& band, int64_t shift);
// cost(original band) = cost(scaled) * factor
double unscale_factor(const Instance& band, int64_t shift);

// Rounded job types present in an instance with their counts.
std::map<JobType, int> type_counts(const Instance& scaled);

std::vector<ConfigurationNR> enumerate_configurations(const Instance& scaled, const NRParams& p);

double config_cost(const ConfigurationNR& c, const NRParams& p);
double config_cost_lower_bound(const ConfigurationNR& c, const NRParams& p);

struct PiModel {
    LinearModel model;
    std::vector<int> x_var;                         // per configuration
    std::map<std::pair<JobType, int>, int> y_var;   // ((r,i), config) -> variable
    std::vector<double> cost;                       // cost(C)
    bool has_anchor = false;                        // some config can satisfy the speed-1 work constraint
};

// `anchor` toggles the constraint asking for a speed-1 machine with work near 1.
PiModel build_pi(const Instance& scaled, const std::vector<ConfigurationNR>& configs, const NRParams& p,
                 bool anchor = true);

struct RoundingLedger {
    double unassigned_size = 0;
    double unassigned_bound = 0;
    int overflow_items = 0;
    int leftover_jobs = 0;
};

struct RoundedSchedule {
    OrderedSchedule schedule;  // on the scaled instance's indices
    RoundingLedger ledger;
};

RoundedSchedule round_pi_solution(const MilpSolution& sol, const Instance& scaled,
                                  const std::vector<ConfigurationNR>& configs, const PiModel& pi,
                                  const NRParams& p);

struct LedgerRow {
    std::string stage;
    std::string instance;
    int64_t zeta = 0;
    std::string guess;
    double z_star = 0;
    double schedule_cost = 0;
    std::optional<double> oracle_cost;
};

std::string ledger_csv(const std::vector<LedgerRow>& rows);

struct BandResult {
    OrderedSchedule schedule;  // on the band instance's indices
    double cost = 0;           // on the band instance
    double z_star = 0;         // best MILP value, in band units
    int guess_job = -1;
    int64_t guess_b = 0;
    int64_t shift = 0;
    int guesses_tried = 0;
    size_t configs = 0;
    long nodes = 0;
    RoundingLedger ledger;
    std::vector<LedgerRow> rows;  // one per solved guess, stage "guess"
};

BandResult solve_bounded_ratio(const Instance& band, const NRParams& p);

OrderedSchedule combine_band_solutions(const Instance& inst, const std::vector<OrderedSchedule>& bands);

struct NoReleaseResult {
    OrderedSchedule schedule;  // on the input instance
    double cost = 0;
    int64_t zeta = 0;
    double band_sum = 0;       // sum of band costs for the chosen shift
    std::vector<LedgerRow> ledger;
};

// Sub-instance with the listed jobs and every machine.
Instance sub_instance(const Instance& inst, const std::vector<int>& jobs);

NoReleaseResult eptas_no_release(const Instance& a, const ParamPack& params);

}  // namespace wct
