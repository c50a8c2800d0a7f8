#include "wct/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace wct {

bool approx_le(double a, double b, double tol) {
    return a <= b + tol * (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

bool approx_eq(double a, double b, double tol) {
    return approx_le(a, b, tol) && approx_le(b, a, tol);
}

Geo::Geo(double delta) : delta_(delta), log_base_(std::log1p(delta)) {
    if (!(delta > 0) || !std::isfinite(delta))
        throw DomainError("delta must be positive");
}

double Geo::value(int64_t e) const {
    return std::pow(1.0 + delta_, static_cast<double>(e));
}

int64_t Geo::ceil_log(double x) const {
    if (!(x > 0) || !std::isfinite(x))
        throw DomainError("logarithm of a nonpositive value");
    auto e = static_cast<int64_t>(std::ceil(std::log(x) / log_base_));
    // The float guess may be off by one either way; settle it against the
    // exact condition (1+d)^{e-1} < x <= (1+d)^e, treating near-boundary
    // values as exact powers.
    while (value(e) < x * (1.0 - kSnap)) ++e;
    while (value(e - 1) >= x * (1.0 - kSnap)) --e;
    return e;
}

int64_t Geo::floor_log(double x) const {
    if (!(x > 0) || !std::isfinite(x))
        throw DomainError("logarithm of a nonpositive value");
    auto e = static_cast<int64_t>(std::floor(std::log(x) / log_base_));
    while (value(e + 1) <= x * (1.0 + kSnap)) ++e;
    while (value(e) > x * (1.0 + kSnap)) --e;
    return e;
}

std::optional<int64_t> Geo::exact_log(double x) const {
    int64_t e = floor_log(x);
    if (std::fabs(value(e) - x) <= kSnap * 4 * x) return e;
    return std::nullopt;
}

void Instance::check() const {
    if (machines.empty()) throw ValidationError("instance has no machines");
    for (const auto& j : jobs) {
        if (!(j.size > 0)) throw DomainError("job " + std::to_string(j.id) + " has nonpositive size");
        if (!(j.weight > 0)) throw DomainError("job " + std::to_string(j.id) + " has nonpositive weight");
        if (!(j.release >= 0)) throw DomainError("job " + std::to_string(j.id) + " has negative release");
    }
    for (const auto& m : machines)
        if (!(m.speed > 0)) throw DomainError("machine " + std::to_string(m.id) + " has nonpositive speed");
}

namespace {

// Three-way comparison of densities w_a/p_a and w_b/p_b with snapping.
int density_cmp(const Job& a, const Job& b) {
    double l = a.weight * b.size;
    double r = b.weight * a.size;
    if (std::fabs(l - r) <= kSnap * 8 * std::max(l, r)) return 0;
    return l < r ? -1 : 1;
}

int size_cmp(const Job& a, const Job& b) {
    if (std::fabs(a.size - b.size) <= kSnap * 8 * std::max(a.size, b.size)) return 0;
    return a.size < b.size ? -1 : 1;
}

}  // namespace

bool natural_less(const Job& a, const Job& b) {
    int d = density_cmp(a, b);
    if (d != 0) return d > 0;
    int s = size_cmp(a, b);
    if (s != 0) return s > 0;
    return a.id < b.id;
}

std::vector<int> natural_order(const std::vector<Job>& jobs, std::vector<int> idx) {
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (natural_less(jobs[a], jobs[b])) return true;
        if (natural_less(jobs[b], jobs[a])) return false;
        return a < b;
    });
    return idx;
}

std::vector<Job> natural_order(std::vector<Job> jobs) {
    std::stable_sort(jobs.begin(), jobs.end(), natural_less);
    return jobs;
}

void validate(const Instance& inst, const OrderedSchedule& s) {
    if (static_cast<int>(s.machines.size()) != inst.m())
        throw ValidationError("schedule has " + std::to_string(s.machines.size()) + " machines, instance has " +
                              std::to_string(inst.m()));
    std::vector<int> seen(inst.n(), 0);
    for (int i = 0; i < inst.m(); ++i)
        for (int j : s.machines[i]) {
            if (j < 0 || j >= inst.n())
                throw ValidationError("machine " + std::to_string(inst.machines[i].id) + " lists unknown job index " +
                                      std::to_string(j));
            if (seen[j]++) throw ValidationError("job " + std::to_string(inst.jobs[j].id) + " scheduled twice");
        }
    for (int j = 0; j < inst.n(); ++j)
        if (!seen[j]) throw ValidationError("job " + std::to_string(inst.jobs[j].id) + " is not scheduled");
    if (inst.has_release)
        for (const auto& j : inst.jobs)
            if (j.release > 0)
                throw ValidationError("ordered schedule cannot honor release date of job " + std::to_string(j.id));
}

double start_time(const Instance& inst, const TimedSchedule& s, int j) {
    const Slot& sl = s.slots[j];
    return sl.completion - inst.jobs[j].size / inst.machines[sl.machine].speed;
}

void validate(const Instance& inst, const TimedSchedule& s) {
    if (static_cast<int>(s.slots.size()) != inst.n())
        throw ValidationError("schedule lists " + std::to_string(s.slots.size()) + " jobs, instance has " +
                              std::to_string(inst.n()));
    std::vector<std::vector<int>> per(inst.m());
    for (int j = 0; j < inst.n(); ++j) {
        const Slot& sl = s.slots[j];
        if (sl.machine < 0 || sl.machine >= inst.m())
            throw ValidationError("job " + std::to_string(inst.jobs[j].id) + " is on an unknown machine");
        double st = start_time(inst, s, j);
        double tol = kCostTol * (1.0 + std::fabs(sl.completion));
        if (st < -tol) throw ValidationError("job " + std::to_string(inst.jobs[j].id) + " starts before time 0");
        if (st < inst.jobs[j].release - tol)
            throw ValidationError("job " + std::to_string(inst.jobs[j].id) + " starts before its release date");
        per[sl.machine].push_back(j);
    }
    for (int i = 0; i < inst.m(); ++i) {
        auto& v = per[i];
        std::sort(v.begin(), v.end(), [&](int a, int b) { return s.slots[a].completion < s.slots[b].completion; });
        for (size_t k = 1; k < v.size(); ++k) {
            double prev = s.slots[v[k - 1]].completion;
            double st = start_time(inst, s, v[k]);
            if (st < prev - kCostTol * (1.0 + std::fabs(prev)))
                throw ValidationError("jobs " + std::to_string(inst.jobs[v[k - 1]].id) + " and " +
                                      std::to_string(inst.jobs[v[k]].id) + " overlap on machine " +
                                      std::to_string(inst.machines[i].id));
        }
    }
}

TimedSchedule to_timed(const Instance& inst, const OrderedSchedule& s) {
    TimedSchedule t;
    t.slots.assign(inst.n(), Slot{});
    for (int i = 0; i < static_cast<int>(s.machines.size()); ++i) {
        double done = 0;
        for (int j : s.machines[i]) {
            done += inst.jobs[j].size;
            t.slots[j] = Slot{i, done / inst.machines[i].speed};
        }
    }
    return t;
}

OrderedSchedule to_ordered(const Instance& inst, const TimedSchedule& s) {
    OrderedSchedule o;
    o.machines.assign(inst.m(), {});
    for (int j = 0; j < inst.n(); ++j) o.machines[s.slots[j].machine].push_back(j);
    for (auto& v : o.machines)
        std::stable_sort(v.begin(), v.end(),
                         [&](int a, int b) { return s.slots[a].completion < s.slots[b].completion; });
    return o;
}

OrderedSchedule naturalize(const Instance& inst, OrderedSchedule s) {
    for (auto& v : s.machines) v = natural_order(inst.jobs, v);
    return s;
}

CostReport cost(const Instance& inst, const OrderedSchedule& s) {
    validate(inst, s);
    return cost(inst, to_timed(inst, s));
}

CostReport cost(const Instance& inst, const TimedSchedule& s) {
    validate(inst, s);
    CostReport r;
    r.kind = Functional::cost;
    r.per_job.resize(inst.n());
    for (int j = 0; j < inst.n(); ++j) {
        r.per_job[j] = inst.jobs[j].weight * s.slots[j].completion;
        r.total += r.per_job[j];
    }
    return r;
}

double gamma_value(const Job& job, double completion, double speed) {
    double proc = job.size / speed;
    if (completion < proc * (1.0 - kSnap))
        throw DomainError("completion time is shorter than the processing time of job " + std::to_string(job.id));
    return job.weight * (completion - proc / 2.0);
}

double gamma_lower_bound(const std::vector<Job>& jobs, double speed) {
    if (jobs.empty()) return 0;
    double total = 0;
    double phi = jobs.front().density();
    for (const auto& j : jobs) {
        total += j.size;
        phi = std::min(phi, j.density());
    }
    return phi * total * total / (2.0 * speed);
}

double block_gamma(double total_size, double density, double start, double speed) {
    return density * (start + total_size / (2.0 * speed)) * total_size;
}

double machine_cost(const std::vector<Job>& ordered, double speed) {
    double done = 0, c = 0;
    for (const auto& j : ordered) {
        done += j.size;
        c += j.weight * done / speed;
    }
    return c;
}

double gamma_sum(const std::vector<Job>& ordered, double speed) {
    double done = 0, c = 0;
    for (const auto& j : ordered) {
        done += j.size;
        c += gamma_value(j, done / speed, speed);
    }
    return c;
}

double u_cost(const std::vector<Job>& ordered, double threshold, double speed) {
    double done = 0, c = 0;
    for (const auto& j : ordered) {
        done += j.size;
        double comp = done / speed;
        c += j.size >= threshold ? j.weight * comp : gamma_value(j, comp, speed);
    }
    return c;
}

CostReport pseudo_cost(const Instance& inst, const TimedSchedule& s, const Geo& geo) {
    CostReport r;
    r.kind = Functional::pseudo_cost;
    r.per_job.resize(inst.n());
    for (int j = 0; j < inst.n(); ++j) {
        double c = s.slots[j].completion;
        if (!(c > 0)) throw DomainError("job " + std::to_string(inst.jobs[j].id) + " has nonpositive completion time");
        int64_t i = geo.interval_index(c);
        r.per_job[j] = inst.jobs[j].weight * geo.value(i + 1);
        r.per_interval[i] += r.per_job[j];
        r.total += r.per_job[j];
    }
    return r;
}

TimelyCheck is_timely(const Instance& inst, const TimedSchedule& s, double delta) {
    TimelyCheck out;
    for (int j = 0; j < inst.n(); ++j) {
        double proc = inst.jobs[j].size / inst.machines[s.slots[j].machine].speed;
        double st = s.slots[j].completion - proc;
        double need = delta * proc;
        if (st < need - kSnap * 8 * (s.slots[j].completion + need)) {
            out.timely = false;
            out.job = j;
            out.start = st;
            out.required = need;
            return out;
        }
    }
    return out;
}

std::string instance_hash(const Instance& inst) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* data, size_t len) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (size_t k = 0; k < len; ++k) {
            h ^= b[k];
            h *= 1099511628211ull;
        }
    };
    for (const auto& j : inst.jobs) {
        mix(&j.id, sizeof j.id);
        mix(&j.size, sizeof j.size);
        mix(&j.weight, sizeof j.weight);
        mix(&j.release, sizeof j.release);
    }
    for (const auto& m : inst.machines) {
        mix(&m.id, sizeof m.id);
        mix(&m.speed, sizeof m.speed);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace wct
