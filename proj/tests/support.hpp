#pragma once

// Generators and brute-force reference solvers shared by the tests and the
// acceptance runner. Nothing here calls the library's own oracles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "wct/core.hpp"
#include "wct/rounding.hpp"
#include "wct/timeline.hpp"

namespace testing_support {

using namespace wct;

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(uint64_t seed) : eng(seed) {}
    double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
    bool coin() { return pick(0, 1) == 1; }
};

inline Instance random_instance(Rng& r, int n, int m, bool release = false) {
    Instance inst;
    for (int i = 0; i < m; ++i) inst.machines.push_back({i, r.uni(0.3, 3.0), {}});
    for (int j = 0; j < n; ++j) {
        Job jb;
        jb.id = j;
        jb.size = r.uni(0.2, 6.0);
        jb.weight = r.uni(0.1, 8.0);
        jb.release = release ? (r.coin() ? 0.0 : r.uni(0.0, 8.0)) : 0.0;
        inst.jobs.push_back(jb);
    }
    inst.has_release = release;
    return inst;
}

// Completion-time sum of jobs run back to back in the given order.
inline double sequence_cost(const std::vector<Job>& jobs, const std::vector<int>& order, double speed) {
    double t = 0, c = 0;
    for (int j : order) {
        t += jobs[j].size / speed;
        c += jobs[j].weight * t;
    }
    return c;
}

// Minimum over every permutation.
inline double brute_single(const std::vector<Job>& jobs, double speed) {
    std::vector<int> order(jobs.size());
    std::iota(order.begin(), order.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do best = std::min(best, sequence_cost(jobs, order, speed));
    while (std::next_permutation(order.begin(), order.end()));
    return best;
}

// Every assignment of jobs to machines, each machine brute-forced.
inline double brute_no_release(const Instance& inst) {
    const int n = inst.n(), m = inst.m();
    std::vector<int> asg(n, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        double total = 0;
        for (int l = 0; l < m; ++l) {
            std::vector<Job> on;
            for (int j = 0; j < n; ++j)
                if (asg[j] == l) on.push_back(inst.jobs[j]);
            if (!on.empty()) total += brute_single(on, inst.machines[l].speed);
        }
        best = std::min(best, total);
        int x = 0;
        while (x < n && ++asg[x] == m) asg[x++] = 0;
        if (x == n) break;
    }
    return best;
}

// Optimum with release dates: every assignment, every order per machine,
// jobs starting as early as the order allows. With timely_delta > 0 a job
// also waits until d p/s, and `objective` prices each completion.
inline double brute_release(const Instance& inst, double timely_delta = 0,
                            const std::function<double(const Job&, double)>& objective = nullptr,
                            TimedSchedule* best_schedule = nullptr) {
    const int n = inst.n(), m = inst.m();
    auto price = [&](const Job& j, double c) { return objective ? objective(j, c) : j.weight * c; };
    std::vector<int> asg(n, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        double total = 0;
        TimedSchedule s;
        s.slots.assign(n, {});
        for (int l = 0; l < m && total < best; ++l) {
            std::vector<int> on;
            for (int j = 0; j < n; ++j)
                if (asg[j] == l) on.push_back(j);
            double mb = std::numeric_limits<double>::infinity();
            std::vector<double> mc(n, 0);
            std::sort(on.begin(), on.end());
            do {
                double t = 0, c = 0;
                std::vector<double> comp(n, 0);
                for (int j : on) {
                    double p = inst.jobs[j].size / inst.machines[l].speed;
                    t = std::max({t, inst.jobs[j].release, timely_delta * p}) + p;
                    comp[j] = t;
                    c += price(inst.jobs[j], t);
                }
                if (c < mb) {
                    mb = c;
                    mc = comp;
                }
            } while (std::next_permutation(on.begin(), on.end()));
            if (on.empty()) mb = 0;
            total += mb;
            for (int j : on) s.slots[j] = {l, mc[j]};
        }
        if (total < best) {
            best = total;
            if (best_schedule) *best_schedule = s;
        }
        int x = 0;
        while (x < n && ++asg[x] == m) asg[x++] = 0;
        if (x == n) break;
    }
    return best;
}

// Pseudo-cost price: weight times the right end of the completion window.
inline std::function<double(const Job&, double)> pseudo_price(double delta) {
    return [delta](const Job& j, double c) {
        double lb = std::log1p(delta);
        double e = std::floor(std::log(c) / lb);
        while (std::pow(1 + delta, e + 1) <= c * (1 + 1e-12)) e += 1;
        while (std::pow(1 + delta, e) > c * (1 + 1e-12)) e -= 1;
        return j.weight * std::pow(1 + delta, e + 1);
    };
}

// Random feasible timely schedule: random machines and order, random idle.
inline TimedSchedule random_timely_schedule(Rng& r, const Instance& inst, double delta, double idle = 2.0) {
    std::vector<int> order(inst.n());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), r.eng);
    std::vector<double> at(inst.m(), 0);
    TimedSchedule s;
    s.slots.assign(inst.n(), {});
    for (int j : order) {
        int l = r.pick(0, inst.m() - 1);
        double p = inst.jobs[j].size / inst.machines[l].speed;
        double st = std::max({at[l], inst.jobs[j].release, delta * p});
        if (r.coin()) st += r.uni(0, idle);
        at[l] = st + p;
        s.slots[j] = {l, at[l]};
    }
    return s;
}

// Rounded instance given by exponents: speeds, then (size, weight, release) per job.
struct ExpJob {
    int64_t size = 0, weight = 0, release = 0;
};
inline Instance exp_instance(double delta, const std::vector<int64_t>& speeds, const std::vector<ExpJob>& jobs) {
    Instance inst;
    inst.has_release = true;
    for (size_t l = 0; l < speeds.size(); ++l) inst.machines.push_back({static_cast<int>(l), 1, {speeds[l]}});
    for (size_t j = 0; j < jobs.size(); ++j) {
        Job jb;
        jb.id = static_cast<int>(j);
        jb.size_e = {jobs[j].size};
        jb.weight_e = {jobs[j].weight};
        jb.release_e = {jobs[j].release};
        inst.jobs.push_back(jb);
    }
    refresh_values(inst, Geo(delta));
    return inst;
}

// A one-machine instance and interval list breaking exactly the given
// condition (1..4) of the list lemma; sizes are real-valued.
struct ListFixture {
    Instance inst;
    IntervalList list;
};
inline ListFixture list_violation(Rng& r, int condition, double delta) {
    Geo g(delta);
    const int64_t i = r.pick(-4, 4);
    const int64_t se = r.pick(-3, 0);
    const double s = g.value(se);
    const double width = s * (g.value(i + 1) - g.value(i));
    const double tiny = width * delta * delta * delta;
    ListFixture f;
    auto job = [&](double size, int64_t rel, int64_t a, int64_t b) {
        f.inst.jobs.push_back({f.inst.n(), size, 1, g.value(rel), {0}, {0}, {rel}});
        f.list.jobs.push_back({0, a, 0, b});
    };
    f.inst.machines = {{0, s, {se}}};
    f.inst.has_release = true;
    f.inst.rounded_delta = delta;
    switch (condition) {
        case 1:
            if (r.coin())
                job(tiny, i + 1, i, i);
            else
                job(tiny, i - 2, i, i - 1);
            break;
        case 2:
            job(0.6 * width, i - 5, i, i);
            job(0.6 * width, i - 5, i, i);
            break;
        case 3:
            job(s * (g.value(i + 2) - g.value(i + 1)), i - 5, i, i + 3);
            job(tiny, i - 5, i + 1, i + 1);
            break;
        default:
            job(tiny, i - 5, i, i + 1);
            job(tiny, i - 5, i, i + 1);
            break;
    }
    return f;
}

}  // namespace testing_support
