#pragma once

#include <optional>

#include "wct/core.hpp"

namespace wct {

enum class Objective { cost, pseudo_cost };

struct OracleLimits {
    int max_jobs = 8;
    int max_machines = 3;
    double time_budget_s = 600;
    Objective objective = Objective::cost;
    // Only used by opt_release.
    bool timely = false;
    double delta = 0;  // base for pseudo-cost and timeliness
    bool prune = true;
};

OracleLimits release_limits();

struct OrderedResult {
    OrderedSchedule schedule;
    double value = 0;
};

struct TimedResult {
    TimedSchedule schedule;
    double value = 0;
};

// Smith's rule on one machine.
OrderedResult smith_single_machine(const std::vector<Job>& jobs, double speed);

// Exact optimum without release dates over all m^n assignments.
OrderedResult opt_no_release(const Instance& inst, const OracleLimits& limits = {});

// Exact optimum with release dates over assignments and per-machine orders,
// each job starting as early as its order allows.
TimedResult opt_release(const Instance& inst, const OracleLimits& limits = release_limits());

// Earliest-start completion times of one machine running `order`.
std::vector<double> earliest_completions(const Instance& inst, int machine, const std::vector<int>& order,
                                         double timely_delta = 0);

}  // namespace wct
