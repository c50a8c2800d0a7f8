#include "wct/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace wct {

OracleLimits release_limits() {
    OracleLimits l;
    l.max_jobs = 7;
    l.max_machines = 3;
    return l;
}

namespace {

using Clock = std::chrono::steady_clock;

void check_limits(const Instance& inst, const OracleLimits& limits) {
    if (inst.n() > limits.max_jobs)
        throw RefusalError("oracle refuses " + std::to_string(inst.n()) + " jobs (limit " +
                           std::to_string(limits.max_jobs) + ")");
    if (inst.m() > limits.max_machines)
        throw RefusalError("oracle refuses " + std::to_string(inst.m()) + " machines (limit " +
                           std::to_string(limits.max_machines) + ")");
}

class Budget {
public:
    explicit Budget(double seconds)
        : end_(Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds))) {}
    void tick() {
        if (++count_ % 4096 == 0 && Clock::now() > end_) throw RefusalError("oracle time budget exceeded");
    }

private:
    Clock::time_point end_;
    long count_ = 0;
};

bool better(double v, double best) {
    if (!std::isfinite(best)) return v < best;
    return v < best - 1e-12 * std::max(1.0, std::fabs(best));
}

}  // namespace

OrderedResult smith_single_machine(const std::vector<Job>& jobs, double speed) {
    for (const auto& j : jobs)
        if (j.release > 0) throw UnsupportedError("Smith's rule does not handle release dates");
    std::vector<int> idx(jobs.size());
    std::iota(idx.begin(), idx.end(), 0);
    OrderedResult r;
    r.schedule.machines.push_back(natural_order(jobs, idx));
    std::vector<Job> ordered;
    for (int i : r.schedule.machines[0]) ordered.push_back(jobs[i]);
    r.value = machine_cost(ordered, speed);
    return r;
}

OrderedResult opt_no_release(const Instance& inst, const OracleLimits& limits) {
    check_limits(inst, limits);
    for (const auto& j : inst.jobs)
        if (j.release > 0) throw UnsupportedError("opt_no_release does not handle release dates");
    const int n = inst.n(), m = inst.m();
    double total_speed = 0, max_speed = 0;
    for (const auto& mc : inst.machines) {
        total_speed += mc.speed;
        max_speed = std::max(max_speed, mc.speed);
    }
    // Lower bound on the cost of jobs k..n-1 wherever they go: their pooled
    // Gamma bound on one machine as fast as all machines together, plus the
    // half-processing terms at the fastest speed.
    std::vector<double> tail_lb(n + 1, 0);
    for (int k = n - 1; k >= 0; --k) {
        std::vector<Job> rest(inst.jobs.begin() + k, inst.jobs.end());
        double half = 0;
        for (const auto& j : rest) half += j.weight * j.size / (2 * max_speed);
        tail_lb[k] = gamma_lower_bound(rest, total_speed) + half;
    }

    std::vector<std::vector<int>> on(m);
    std::vector<double> mcost(m, 0);
    auto eval = [&](int i) {
        std::vector<int> ord = natural_order(inst.jobs, on[i]);
        std::vector<Job> js;
        for (int j : ord) js.push_back(inst.jobs[j]);
        return machine_cost(js, inst.machines[i].speed);
    };

    OrderedResult best;
    best.value = std::numeric_limits<double>::infinity();
    Budget budget(limits.time_budget_s);

    auto dfs = [&](auto&& self, int k, double partial) -> void {
        budget.tick();
        if (k == n) {
            if (better(partial, best.value)) {
                best.value = partial;
                best.schedule.machines.assign(m, {});
                for (int i = 0; i < m; ++i) best.schedule.machines[i] = natural_order(inst.jobs, on[i]);
            }
            return;
        }
        if (limits.prune && partial + tail_lb[k] > best.value * (1 + 1e-9)) return;
        for (int i = 0; i < m; ++i) {
            on[i].push_back(k);
            double old = mcost[i];
            mcost[i] = eval(i);
            self(self, k + 1, partial - old + mcost[i]);
            mcost[i] = old;
            on[i].pop_back();
        }
    };
    dfs(dfs, 0, 0.0);
    if (n == 0) {
        best.value = 0;
        best.schedule.machines.assign(m, {});
    }
    return best;
}

std::vector<double> earliest_completions(const Instance& inst, int machine, const std::vector<int>& order,
                                         double timely_delta) {
    std::vector<double> out;
    out.reserve(order.size());
    double t = 0;
    const double sp = inst.machines[machine].speed;
    for (int j : order) {
        double proc = inst.jobs[j].size / sp;
        double st = std::max({t, inst.jobs[j].release, timely_delta * proc});
        t = st + proc;
        out.push_back(t);
    }
    return out;
}

TimedResult opt_release(const Instance& inst, const OracleLimits& limits) {
    check_limits(inst, limits);
    const int n = inst.n(), m = inst.m();
    double d = limits.delta > 0 ? limits.delta : inst.rounded_delta;
    if ((limits.objective == Objective::pseudo_cost || limits.timely) && !(d > 0))
        throw DomainError("pseudo-cost oracle needs a delta");
    std::optional<Geo> geo;
    if (d > 0) geo.emplace(d);
    const double td = limits.timely ? d : 0;
    Budget budget(limits.time_budget_s);

    auto value_of = [&](int j, double c) {
        if (limits.objective == Objective::cost) return inst.jobs[j].weight * c;
        return inst.jobs[j].weight * geo->value(geo->interval_index(c) + 1);
    };

    // Best order per (machine, subset), first in lexicographic permutation order.
    const int subsets = 1 << n;
    std::vector<std::vector<double>> memo(m, std::vector<double>(subsets, -1));
    std::vector<std::vector<std::vector<int>>> memo_order(m, std::vector<std::vector<int>>(subsets));
    auto best_order = [&](int i, int mask) -> double {
        if (memo[i][mask] >= 0) return memo[i][mask];
        std::vector<int> perm;
        for (int j = 0; j < n; ++j)
            if (mask >> j & 1) perm.push_back(j);
        double bv = std::numeric_limits<double>::infinity();
        std::vector<int> bo;
        do {
            budget.tick();
            auto comp = earliest_completions(inst, i, perm, td);
            double v = 0;
            for (size_t k = 0; k < perm.size(); ++k) v += value_of(perm[k], comp[k]);
            if (better(v, bv)) {
                bv = v;
                bo = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        memo[i][mask] = bv;
        memo_order[i][mask] = bo;
        return bv;
    };

    double max_speed = 0;
    for (const auto& mc : inst.machines) max_speed = std::max(max_speed, mc.speed);
    std::vector<double> tail_lb(n + 1, 0);
    for (int k = n - 1; k >= 0; --k) {
        const Job& j = inst.jobs[k];
        tail_lb[k] = tail_lb[k + 1] + j.weight * std::max(j.release, j.size / max_speed);
    }

    std::vector<int> mask(m, 0);
    std::vector<int> best_mask;
    double best = std::numeric_limits<double>::infinity();
    auto dfs = [&](auto&& self, int k) -> void {
        budget.tick();
        if (k == n) {
            double v = 0;
            for (int i = 0; i < m; ++i) v += best_order(i, mask[i]);
            if (better(v, best)) {
                best = v;
                best_mask = mask;
            }
            return;
        }
        if (limits.prune) {
            // A machine's best cost only grows as jobs are added to it.
            double lb = 0;
            for (int i = 0; i < m; ++i)
                if (mask[i]) lb += best_order(i, mask[i]);
            if (lb + tail_lb[k] > best * (1 + 1e-9)) return;
        }
        for (int i = 0; i < m; ++i) {
            mask[i] |= 1 << k;
            self(self, k + 1);
            mask[i] &= ~(1 << k);
        }
    };
    dfs(dfs, 0);

    TimedResult r;
    r.schedule.slots.assign(n, Slot{});
    if (n == 0) return r;
    r.value = best;
    for (int i = 0; i < m; ++i) {
        if (!best_mask[i]) continue;
        const auto& ord = memo_order[i][best_mask[i]];
        auto comp = earliest_completions(inst, i, ord, td);
        for (size_t k = 0; k < ord.size(); ++k) r.schedule.slots[ord[k]] = Slot{i, comp[k]};
    }
    return r;
}

}  // namespace wct
