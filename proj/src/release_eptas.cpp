#include "wct/release_eptas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "wct/oracle.hpp"
#include "release_internal.hpp"

namespace wct {

using detail::Occupancy;
using detail::proc;
using detail::start_of;

namespace detail {

std::optional<double> Occupancy::fit(double lo, double d, double end_hi) const {
    double cur = lo;
    for (const auto& [a, b] : busy_) {
        if (b <= cur) continue;
        if (a >= cur + d) break;
        cur = std::max(cur, b);
    }
    if (cur + d > end_hi * (1.0 + kSnap)) return std::nullopt;
    return cur;
}

double Occupancy::idle_in(double lo, double hi) const {
    double busy = 0;
    for (const auto& [a, b] : busy_) {
        if (a >= hi) break;
        busy += std::max(0.0, std::min(b, hi) - std::max(a, lo));
    }
    return std::max(0.0, hi - lo - busy);
}

double Occupancy::end() const {
    double e = 0;
    for (const auto& [a, b] : busy_) e = std::max(e, b);
    return e;
}

std::vector<Occupancy> occupancy(const Instance& inst, const TimedSchedule& s) {
    std::vector<Occupancy> occ(inst.m());
    for (int j = 0; j < inst.n(); ++j) {
        int l = s.slots[j].machine;
        if (l < 0) continue;
        occ[l].add(s.slots[j].completion - proc(inst, j, l), s.slots[j].completion);
    }
    return occ;
}

double earliest_start(const Instance& inst, int j, int l, double lo, double delta) {
    return std::max({lo, inst.jobs[j].release, delta * proc(inst, j, l)});
}

void resequence_after(const Instance& inst, TimedSchedule& s, double threshold, double delta) {
    for (int l = 0; l < inst.m(); ++l) {
        std::vector<int> late;
        double from = kInf;
        for (int j = 0; j < inst.n(); ++j) {
            if (s.slots[j].machine != l) continue;
            double st = start_of(inst, s, j);
            if (st > threshold) {
                late.push_back(j);
                from = std::min(from, st);
            }
        }
        if (late.empty()) continue;
        std::stable_sort(late.begin(), late.end(), [&](int a, int b) {
            double da = inst.jobs[a].density(), db = inst.jobs[b].density();
            if (da != db) return da > db;
            return a < b;
        });
        double cur = from;
        for (int j : late) {
            double st = earliest_start(inst, j, l, cur, delta);
            s.slots[j].completion = st + proc(inst, j, l);
            cur = s.slots[j].completion;
        }
    }
}

double subset_pseudo(const Instance& inst, const TimedSchedule& s, const Geo& geo, int machine) {
    double total = 0;
    for (int j = 0; j < inst.n(); ++j) {
        if (s.slots[j].machine != machine) continue;
        total += inst.jobs[j].weight * geo.value(geo.interval_index(s.slots[j].completion) + 1);
    }
    return total;
}

}  // namespace detail

// ---- parameters ----

ReleaseParams ReleaseParams::from(const ParamPack& p) {
    if (!p.release || !(p.alpha > 0)) throw DomainError("release parameters are missing from the parameter pack");
    ReleaseParams rp;
    rp.delta = p.delta;
    rp.profile = p.profile;
    rp.y_hat = p.y_hat;
    rp.alpha = p.alpha;
    double k = p.alpha / p.delta;
    if (!(k < 9e15)) throw RefusalError("alpha/delta does not fit in 64 bits");
    rp.k_count = static_cast<int64_t>(std::llround(k));
    rp.y = p.y;
    rp.fast_count = std::pow(1.0 / p.delta, 7) + 1;
    rp.min_machines = 2.0 * std::pow(1.0 / p.delta, 7) + 3;
    return rp;
}

int64_t ReleaseParams::q(int64_t i, int64_t k, int64_t theta) const {
    if (i < 0) return theta;
    if (k >= k_count) return q(i + 1, k - k_count, theta);
    const double step = std::log(alpha) / geo().log_base();
    double e = static_cast<double>(k + i * k_count) * step;
    if (e > 4e18) return std::numeric_limits<int64_t>::max() / 2;
    return theta + static_cast<int64_t>(std::ceil(e - 1e-9));
}

double ReleaseParams::psi(int64_t i, int64_t k, int64_t theta) const {
    int64_t e = q(i, k, theta);
    double v = geo().value(e);
    return std::isfinite(v) ? v : kInf;
}

double ReleaseParams::horizon(double R) const {
    return profile == Profile::practical ? R * y_hat / std::pow(delta, 5) : R * y_hat / std::pow(delta, 25);
}

double ReleaseParams::gamma_r(double R) const {
    Geo g = geo();
    double logr = R > 1 ? std::log(R) / g.log_base() : 0.0;
    double den = std::pow(1 + delta, static_cast<double>(y)) * static_cast<double>(y + 1) * (logr + 1);
    return (profile == Profile::practical ? std::pow(delta, 4) : std::pow(delta, 20)) / den;
}

double ReleaseParams::slow_cutoff(double D, double L) const {
    if (profile == Profile::practical) return std::pow(delta, 3) / ((1 + delta) * (1 + delta) * std::min(D, 1e3));
    return std::pow(delta, 6) / (L * (1 + delta) * (1 + delta) * D);
}

int ReleaseParams::fast_machines(int m) const {
    return static_cast<int>(std::min<double>(m, fast_count));
}

std::vector<int> speed_rank(const Instance& inst) {
    std::vector<int> r(inst.m());
    std::iota(r.begin(), r.end(), 0);
    std::stable_sort(r.begin(), r.end(),
                     [&](int a, int b) { return inst.machines[a].speed > inst.machines[b].speed; });
    return r;
}

// ---- release shifting ----

ReleaseShift release_shift(const Instance& tilde, int64_t k, const ReleaseParams& rp) {
    if (!tilde.rounded()) throw DomainError("release shifting needs a rounded instance");
    if (k < 0 || k >= rp.k_count) throw DomainError("k out of range");
    const int64_t theta = min_release_exp(tilde);
    ReleaseShift out;
    out.shifted = tilde;
    out.part_of.assign(tilde.n(), 0);
    for (int j = 0; j < tilde.n(); ++j) {
        int64_t e = tilde.jobs[j].release_e.exponent;
        for (int64_t i = 0; rp.q(i, k, theta) <= e; ++i) {
            if (e < rp.q(i, k + 1, theta)) {
                e = rp.q(i, k + 1, theta);
                break;
            }
        }
        out.shifted.jobs[j].release_e = {e};
        int64_t part = 0;
        while (e >= rp.q(part, k, theta)) ++part;
        out.part_of[j] = static_cast<int>(part);
    }
    refresh_values(out.shifted, rp.geo());
    int parts = 0;
    for (int p : out.part_of) parts = std::max(parts, p + 1);
    out.parts.assign(parts, {});
    std::vector<std::set<int64_t>> rel(parts);
    for (int j = 0; j < tilde.n(); ++j) {
        out.parts[out.part_of[j]].push_back(j);
        rel[out.part_of[j]].insert(out.shifted.jobs[j].release_e.exponent);
    }
    for (auto& r : rel) out.distinct_releases.push_back(r.size());
    return out;
}

TimedSchedule insert_release_idle(const Instance& tilde, const TimedSchedule& s, int64_t k, const ReleaseParams& rp) {
    const int64_t theta = min_release_exp(tilde);
    TimedSchedule out = s;
    double last = 0;
    for (int j = 0; j < tilde.n(); ++j) last = std::max(last, start_of(tilde, s, j));
    for (int l = 0; l < tilde.m(); ++l) {
        std::vector<int> v;
        for (int j = 0; j < tilde.n(); ++j)
            if (s.slots[j].machine == l) v.push_back(j);
        std::sort(v.begin(), v.end(), [&](int a, int b) { return s.slots[a].completion < s.slots[b].completion; });
        for (int64_t i = 0;; ++i) {
            double lo = rp.psi(i, k, theta), hi = rp.psi(i, k + 1, theta);
            if (!(lo <= last)) break;
            auto it = std::find_if(v.begin(), v.end(), [&](int j) {
                double st = start_of(tilde, s, j);
                return st >= lo * (1 - kSnap) && st < hi * (1 - kSnap);
            });
            if (it == v.end()) continue;
            for (auto jt = it; jt != v.end(); ++jt) out.slots[*jt].completion += hi - lo;
        }
    }
    return out;
}

IdleInsertionLedger idle_insertion_ledger(const Instance& tilde, const TimedSchedule& opt, const ReleaseParams& rp) {
    IdleInsertionLedger led;
    led.opt = cost(tilde, opt).total;
    led.bound = (rp.alpha / rp.delta + (1 + rp.delta) * rp.alpha) * led.opt;
    led.best = kInf;
    const int64_t theta = min_release_exp(tilde);
    Geo geo = rp.geo();
    double last = 0;
    for (int j = 0; j < tilde.n(); ++j) last = std::max(last, start_of(tilde, opt, j));
    const int64_t last_e = geo.floor_log(last);
    for (int64_t k = 0; k < rp.k_count; ++k) {
        double c;
        if (rp.q(0, k, theta) > last_e + 1) {
            ++led.identity_ks;
            c = led.opt;
        } else {
            TimedSchedule t = insert_release_idle(tilde, opt, k, rp);
            ReleaseShift sh = release_shift(tilde, k, rp);
            try {
                validate(sh.shifted, t);
            } catch (const ValidationError&) {
                led.all_feasible = false;
            }
            c = cost(tilde, t).total;
        }
        led.sum += c;
        if (c < led.best) {
            led.best = c;
            led.best_k = k;
        }
    }
    return led;
}

ChosenK choose_k(const Instance& tilde, const ReleaseParams& rp,
                 const std::function<TimedSchedule(const Instance&, int64_t)>& solver,
                 const std::function<double(const Instance&, const TimedSchedule&)>& measure) {
    const int64_t theta = min_release_exp(tilde);
    int64_t max_e = theta;
    for (const auto& j : tilde.jobs) max_e = std::max(max_e, j.release_e.exponent);
    std::vector<int64_t> ks;
    for (int64_t k = 0; k < rp.k_count; ++k) {
        ks.push_back(k);
        if (rp.q(0, k, theta) > max_e) break;  // this and every larger k leave the releases alone
    }
    std::map<std::vector<int64_t>, bool> seen;
    ChosenK best;
    best.value = kInf;
    for (int64_t k : ks) {
        ReleaseShift sh = release_shift(tilde, k, rp);
        std::vector<int64_t> key;
        for (const auto& j : sh.shifted.jobs) key.push_back(j.release_e.exponent);
        if (seen.count(key)) continue;
        seen[key] = true;
        TimedSchedule s = solver(sh.shifted, k);
        validate(sh.shifted, s);
        ++best.solved;
        double v = measure(sh.shifted, s);
        if (v < best.value) {
            best.value = v;
            best.k = k;
            best.schedule = std::move(s);
        }
    }
    return best;
}

// ---- properties ----

namespace {

PropertyCheck density_property(const Instance& inst, const TimedSchedule& s, double psi, double start_from,
                               double gap, double y_hat, double delta) {
    PropertyCheck pc;
    const double drop = std::pow(1 + delta, y_hat);
    for (int l = 0; l < inst.m(); ++l) {
        std::vector<int> v;
        for (int j = 0; j < inst.n(); ++j)
            if (s.slots[j].machine == l) v.push_back(j);
        std::sort(v.begin(), v.end(), [&](int a, int b) { return s.slots[a].completion < s.slots[b].completion; });
        int prev = -1;
        for (int j : v) {
            if (start_of(inst, s, j) <= psi) continue;
            if (prev >= 0 && inst.jobs[j].density() > inst.jobs[prev].density() * (1 + kSnap)) {
                pc = {false, prev, j, "density increases after psi"};
                return pc;
            }
            prev = j;
        }
        for (int a : v) {
            if (start_of(inst, s, a) < start_from * (1 - kSnap)) continue;
            for (int b : v) {
                if (s.slots[b].completion < s.slots[a].completion + gap) continue;
                if (inst.jobs[b].density() > inst.jobs[a].density() / drop * (1 + 1e-9)) {
                    pc = {false, a, b, "late job is not sparser by (1+d)^y_hat"};
                    return pc;
                }
            }
        }
    }
    return pc;
}

}  // namespace

PropertyCheck property_1(const Instance& inst, const TimedSchedule& s, double psi, double psi_prime, double y_hat,
                         double delta) {
    return density_property(inst, s, psi, psi_prime / 2, psi * y_hat / std::pow(delta, 28), y_hat, delta);
}

PropertyCheck property_3(const Instance& inst, const TimedSchedule& s, double psi, double psi_prime, double y_hat,
                         double delta) {
    return density_property(inst, s, psi, psi_prime / 4, psi * y_hat / std::pow(delta, 27), y_hat, delta);
}

PropertyCheck property_no_large(const Instance& inst, const TimedSchedule& s, double psi, double y_hat,
                                double delta) {
    PropertyCheck pc;
    const double lim = psi * y_hat / std::pow(delta, 25);
    for (int j = 0; j < inst.n(); ++j) {
        int l = s.slots[j].machine;
        if (l < 0) continue;
        if (inst.jobs[j].size > lim * inst.machines[l].speed * (1 + kSnap)) return {false, j, -1, "job too large"};
    }
    return pc;
}

// ---- palettes ----

bool Palette::pink(size_t c) const {
    if (c >= colors.size()) return false;
    return std::all_of(colors[c].begin(), colors[c].end(), [](char x) { return x != 0; });
}

bool Palette::allows(size_t c, int64_t t) const {
    if (c >= colors.size() || t < t_lo || t > t_hi) return true;
    return colors[c][t - t_lo] != 0;
}

std::optional<size_t> Palette::pink_component() const {
    for (size_t c = 1; c < colors.size(); ++c)
        if (pink(c)) return c;
    return std::nullopt;
}

Palette compute_palette(const Instance& inst, const TimedSchedule& s, double delta, int components, int64_t t_lo,
                        int64_t t_hi) {
    Geo geo(delta);
    Palette p;
    p.t_lo = t_lo;
    p.t_hi = t_hi;
    auto rank = speed_rank(inst);
    int comps = std::min(components, inst.m());
    auto occ = detail::occupancy(inst, s);
    for (int c = 0; c < comps; ++c) {
        int l = rank[c];
        p.machines.push_back(l);
        std::vector<char> col(static_cast<size_t>(std::max<int64_t>(0, t_hi - t_lo + 1)), 0);
        for (int j = 0; j < inst.n(); ++j) {
            if (s.slots[j].machine != l) continue;
            int64_t t = geo.interval_index(start_of(inst, s, j));
            if (t >= t_lo && t <= t_hi) col[t - t_lo] = 1;
        }
        for (int64_t t = t_lo; t <= t_hi; ++t) {
            double a = geo.value(t), b = geo.value(t + 1);
            if (occ[l].idle_in(a, b) > 1e-12 * b) col[t - t_lo] = 1;
        }
        p.colors.push_back(std::move(col));
    }
    return p;
}

Palette full_palette(const Instance& inst, int components, int64_t t_lo, int64_t t_hi) {
    Palette p;
    p.t_lo = t_lo;
    p.t_hi = t_hi;
    auto rank = speed_rank(inst);
    int comps = std::min(components, inst.m());
    for (int c = 0; c < comps; ++c) {
        p.machines.push_back(rank[c]);
        p.colors.emplace_back(static_cast<size_t>(std::max<int64_t>(0, t_hi - t_lo + 1)), 1);
    }
    return p;
}

double palette_space_log10(int components, int64_t t_lo, int64_t t_hi) {
    return static_cast<double>(components) * static_cast<double>(std::max<int64_t>(0, t_hi - t_lo + 1)) *
           std::log10(2.0);
}

void check_palette_cap(int components, int64_t t_lo, int64_t t_hi, const ReleaseParams& rp) {
    double lg = palette_space_log10(components, t_lo, t_hi);
    if (lg > std::log10(rp.palette_cap)) {
        std::ostringstream os;
        os << "palette space of 10^" << lg << " exceeds the cap of " << rp.palette_cap;
        throw RefusalError(os.str());
    }
}

PinkResult ensure_pink(const Instance& inst, const TimedSchedule& s, double delta, int components, double psi,
                       int64_t t_lo, int64_t t_hi) {
    int comps = std::min(components, inst.m());
    if (comps < 2) throw DomainError("a pink machine needs two candidate machines");
    Geo geo(delta);
    PinkResult res;
    res.schedule = time_stretch(inst, s, delta).actual();
    TimedSchedule& out = res.schedule;
    auto rank = speed_rank(inst);
    std::vector<double> weight(inst.m(), 0);
    for (int j = 0; j < inst.n(); ++j) weight[out.slots[j].machine] += inst.jobs[j].weight;
    int vc = 1;
    for (int c = 2; c < comps; ++c)
        if (weight[rank[c]] < weight[rank[vc]]) vc = c;
    const int v = rank[vc], host = rank[0];
    res.v = v;

    std::vector<int> moving;
    for (int j = 0; j < inst.n(); ++j)
        if (out.slots[j].machine == v && start_of(inst, out, j) <= psi) moving.push_back(j);
    std::sort(moving.begin(), moving.end(),
              [&](int a, int b) { return out.slots[a].completion < out.slots[b].completion; });
    auto occ = detail::occupancy(inst, out);
    for (int j : moving) {
        double old_c = out.slots[j].completion;
        double p = proc(inst, j, host);
        double bound = geo.value(geo.interval_index(old_c) + 1) / std::pow(delta, 6);
        double lo = detail::earliest_start(inst, j, host, 0, delta);
        auto st = occ[host].fit(lo, p, bound);
        if (!st) {
            res.fits = false;
            st = occ[host].fit(lo, p);
        }
        occ[host].add(*st, *st + p);
        out.slots[j] = {host, *st + p};
        res.max_inflation = std::max(res.max_inflation, (*st + p) / old_c);
        ++res.moved;
    }
    detail::resequence_after(inst, out, psi, delta);
    Palette pal = compute_palette(inst, out, delta, comps, t_lo, t_hi);
    res.pink = pal.pink(static_cast<size_t>(vc));
    return res;
}

// ---- sparse windows ----

namespace {

// started size per (machine, window)
std::map<std::pair<int, int64_t>, double> started_size(const Instance& inst, const TimedSchedule& s, const Geo& geo) {
    std::map<std::pair<int, int64_t>, double> out;
    for (int j = 0; j < inst.n(); ++j) {
        int l = s.slots[j].machine;
        if (l < 0) continue;
        out[{l, geo.interval_index(start_of(inst, s, j))}] += inst.jobs[j].size;
    }
    return out;
}

}  // namespace

std::vector<std::pair<int, int64_t>> sparse_windows(const Instance& inst, const TimedSchedule& s, double delta,
                                                    double horizon) {
    Geo geo(delta);
    std::vector<std::pair<int, int64_t>> out;
    const double d5 = std::pow(delta, 5);
    for (const auto& [key, size] : started_size(inst, s, geo)) {
        if (geo.value(key.second) > horizon) continue;
        if (size <= d5 * inst.machines[key.first].speed * geo.value(key.second) * (1 + kSnap)) out.push_back(key);
    }
    return out;
}

bool sparse_postcondition(const Instance& inst, const TimedSchedule& s, double delta, int components,
                          double horizon) {
    auto rank = speed_rank(inst);
    std::vector<int> rank_of(inst.m());
    for (int c = 0; c < inst.m(); ++c) rank_of[rank[c]] = c;
    std::map<int64_t, int> per_t;
    for (const auto& [l, t] : sparse_windows(inst, s, delta, horizon)) {
        if (rank_of[l] >= components) return false;
        if (++per_t[t] > 1) return false;
    }
    return true;
}

SparseResult eliminate_sparse(const Instance& inst, const TimedSchedule& s, double delta, int components, int v,
                              double horizon) {
    Geo geo(delta);
    SparseResult res;
    auto rank = speed_rank(inst);
    std::vector<int> rank_of(inst.m());
    for (int c = 0; c < inst.m(); ++c) rank_of[rank[c]] = c;

    // Move the jobs starting in window t of `from` into window t of `to`.
    auto move_window = [&](TimedSchedule& sch, int from, int to, int64_t t) {
        const double a = geo.value(t), b = geo.value(t + 1);
        std::vector<int> jobs;
        double lo = a;
        for (int j = 0; j < inst.n(); ++j) {
            if (sch.slots[j].machine == to) {
                double st = start_of(inst, sch, j);
                if (st >= a * (1 - kSnap) && st < b && sch.slots[j].completion <= b * (1 + kSnap))
                    lo = std::max(lo, sch.slots[j].completion);
            }
            if (sch.slots[j].machine != from) continue;
            if (geo.interval_index(start_of(inst, sch, j)) == t) jobs.push_back(j);
        }
        auto occ = detail::occupancy(inst, sch);
        TimedSchedule trial = sch;
        for (int j : jobs) {
            double p = proc(inst, j, to);
            double st0 = detail::earliest_start(inst, j, to, lo, delta);
            auto st = occ[to].fit(st0, p, b);
            if (!st) return false;
            occ[to].add(*st, *st + p);
            trial.slots[j] = {to, *st + p};
        }
        sch = std::move(trial);
        return true;
    };

    TimedSchedule cur = time_stretch(inst, s, delta).actual();
    std::set<std::tuple<int64_t, int, int>> refused;
    for (int guard = 0; guard < 10 * inst.n() + 10; ++guard) {
        std::map<int64_t, std::vector<int>> by_t;
        for (const auto& [l, t] : sparse_windows(inst, cur, delta, horizon)) by_t[t].push_back(l);
        bool moved = false;
        for (auto& [t, ls] : by_t) {
            if (ls.size() < 2) continue;
            std::sort(ls.begin(), ls.end(), [&](int a, int b) { return rank_of[a] < rank_of[b]; });
            for (size_t x = ls.size() - 1; x >= 1 && !moved; --x) {
                int from = ls[x], to = ls[0];
                if (refused.count({t, from, to})) continue;
                if (move_window(cur, from, to, t)) {
                    ++res.merged;
                    moved = true;
                } else {
                    refused.insert({t, from, to});
                    ++res.failed;
                }
            }
            if (moved) break;
        }
        if (!moved) break;
    }

    cur = time_stretch(inst, cur, delta).actual();
    if (v >= 0) {
        for (const auto& [l, t] : sparse_windows(inst, cur, delta, horizon)) {
            if (rank_of[l] < components || l == v) continue;
            if (move_window(cur, l, v, t))
                ++res.to_pink;
            else
                ++res.failed;
        }
    }
    res.schedule = std::move(cur);
    res.postcondition = sparse_postcondition(inst, res.schedule, delta, components, horizon);
    return res;
}

// ---- combining density bands ----

bool CombineBandsResult::audits_pass(double delta) const {
    const double tol = 1 + 1e-9;
    for (const auto& g : sparse_loads)
        if (g.load > g.bound * tol) return false;
    for (const auto& g : postpone_loads)
        if (g.load > g.bound * tol) return false;
    for (const auto& c : charges)
        if (c.size > c.bound * tol) return false;
    for (double r : machine_ratio)
        if (r > (1 + delta) * tol) return false;
    return placement_failures == 0 && prefix_ok;
}

CombineBandsResult combine_density_bands(const Instance& inst, const std::vector<BandSchedule>& bands, double delta,
                                         double max_release, int components) {
    Geo geo(delta);
    CombineBandsResult res;
    const int n = inst.n();
    const double d5 = std::pow(delta, 5), d10 = std::pow(delta, 10);
    auto rank = speed_rank(inst);
    std::vector<int> rank_of(inst.m());
    for (int c = 0; c < inst.m(); ++c) rank_of[rank[c]] = c;

    // band schedule holding each job
    std::vector<int> owner(n, -1);
    for (size_t b = 0; b < bands.size(); ++b) {
        if (static_cast<int>(bands[b].schedule.slots.size()) != n)
            throw ValidationError("band schedule does not match the instance");
        for (int j = 0; j < n; ++j)
            if (bands[b].schedule.slots[j].machine >= 0) {
                if (owner[j] >= 0) throw ValidationError("job appears in two band schedules");
                owner[j] = static_cast<int>(b);
            }
    }
    for (int j = 0; j < n; ++j)
        if (owner[j] < 0) throw ValidationError("job missing from every band schedule");

    std::vector<size_t> order(bands.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return bands[a].k > bands[b].k; });

    enum Mode { original, sparse_gap, postponed };
    std::vector<Mode> mode(n, original);
    std::vector<int64_t> target(n, 0);
    auto slot_start = [&](int j) { return start_of(inst, bands[owner[j]].schedule, j); };
    auto slot_end = [&](int j) { return bands[owner[j]].schedule.slots[j].completion; };

    for (int u = 0; u < inst.m(); ++u) {
        const double speed = inst.machines[u].speed;
        std::vector<int> mine;
        for (int j = 0; j < n; ++j)
            if (bands[owner[j]].schedule.slots[j].machine == u) mine.push_back(j);
        if (mine.empty()) continue;

        // windows strictly inside some job of any band are not sparse gaps on palette machines
        std::set<int64_t> covered;
        int64_t lowest = std::numeric_limits<int64_t>::max();
        for (int j : mine) {
            int64_t a = geo.interval_index(slot_start(j)), b = geo.interval_index(slot_end(j));
            lowest = std::min(lowest, a);
            for (int64_t t = a + 1; t < b; ++t) covered.insert(t);
        }
        auto has_sparse_gap = [&](int64_t t) { return rank_of[u] >= components || !covered.count(t); };

        struct Owner {
            int64_t k, t;
        };
        std::map<int64_t, Owner> taken;
        const int64_t base = lowest - 1;
        auto declare = [&](int64_t upto, Owner o) {
            for (int64_t t = base; t <= upto; ++t)
                if (!taken.count(t)) taken[t] = o;
        };
        std::map<int64_t, double> sparse_load, postpone_load;
        std::set<int64_t> postpone_used;

        for (size_t ob : order) {
            const BandSchedule& band = bands[ob];
            std::map<int64_t, std::vector<int>, std::greater<>> groups;
            for (int j : mine)
                if (owner[j] == static_cast<int>(ob)) groups[geo.interval_index(slot_start(j))].push_back(j);
            std::set<int> done;
            for (auto& [t, group] : groups) {
                auto it = taken.find(t);
                if (it == taken.end() || it->second.k == band.k) {
                    double total = 0;
                    for (int j : group) total += inst.jobs[j].size;
                    const Owner self{band.k, t};
                    if (total <= d5 * speed * geo.value(t) * (1 + kSnap)) {
                        for (int j : group) {
                            mode[j] = sparse_gap;
                            target[j] = t;
                        }
                        sparse_load[t] += total;
                        if (!has_sparse_gap(t)) ++res.placement_failures;
                        if (sparse_load[t] > d5 * speed * geo.value(t) && it == taken.end()) declare(t, self);
                    } else {
                        if (it == taken.end()) declare(t, self);
                        int last = group[0];
                        for (int j : group) {
                            int64_t te = geo.interval_index(slot_end(j));
                            if (te > t) declare(te - 1, self);
                            if (slot_end(j) > slot_end(last)) last = j;
                        }
                        int64_t te = geo.interval_index(slot_end(last));
                        if (te != t && (slot_end(last) - geo.value(te)) * speed >= d5 * speed * geo.value(te) &&
                            !taken.count(te))
                            declare(te, self);
                    }
                    for (int j : group) done.insert(j);
                    continue;
                }
                // window owned by a denser band: postpone everything left of this band
                const Owner o = it->second;
                const int64_t mu = o.k - band.k;
                const double limit = geo.value(o.t) / std::pow(delta, 10.0 * static_cast<double>(mu));
                int64_t tt = geo.floor_log(limit) - 1;
                while (postpone_used.count(tt)) --tt;
                std::vector<int> rest;
                double total = 0;
                double rel = 0;
                for (int j : mine)
                    if (owner[j] == static_cast<int>(ob) && !done.count(j)) {
                        rest.push_back(j);
                        total += inst.jobs[j].size;
                        rel = std::max(rel, inst.jobs[j].release);
                    }
                if (geo.value(tt) < rel * (1 - kSnap)) ++res.placement_failures;
                postpone_used.insert(tt);
                postpone_load[tt] += total;
                for (int j : rest) {
                    mode[j] = postponed;
                    target[j] = tt;
                    done.insert(j);
                }
                res.postponed += static_cast<int>(rest.size());
                res.charges.push_back({u, o.k, o.t, mu, total,
                                       speed * geo.value(o.t) / std::pow(delta, 10.0 * (mu - 1) + 3)});
                declare(tt, o);
                break;
            }
        }
        // the taken set must be an interval starting at base
        if (!taken.empty()) {
            int64_t expect = base;
            for (const auto& [t, o] : taken) {
                if (t != expect) res.prefix_ok = false;
                expect = t + 1;
            }
        }
        for (const auto& [t, load] : sparse_load) res.sparse_loads.push_back({u, t, load, 2 * d5 * speed * geo.value(t)});
        for (const auto& [t, load] : postpone_load)
            res.postpone_loads.push_back({u, t, load, d10 * speed * geo.value(t)});
    }

    // realize
    TimedSchedule out;
    out.slots.assign(n, {});
    std::vector<Occupancy> occ(inst.m());
    for (size_t ob : order)
        for (int j = 0; j < n; ++j) {
            if (owner[j] != static_cast<int>(ob) || mode[j] != original) continue;
            int u = bands[ob].schedule.slots[j].machine;
            double p = proc(inst, j, u);
            double want = slot_start(j);
            auto st = occ[u].fit(want, p);
            occ[u].add(*st, *st + p);
            out.slots[j] = {u, *st + p};
        }
    for (Mode m : {sparse_gap, postponed}) {
        std::vector<int> js;
        for (int j = 0; j < n; ++j)
            if (mode[j] == m) js.push_back(j);
        std::sort(js.begin(), js.end(), [&](int a, int b) {
            if (target[a] != target[b]) return target[a] < target[b];
            return a < b;
        });
        for (int j : js) {
            int u = bands[owner[j]].schedule.slots[j].machine;
            double p = proc(inst, j, u);
            double lo = detail::earliest_start(inst, j, u, geo.value(target[j]), delta);
            auto st = occ[u].fit(lo, p, geo.value(target[j] + 1));
            if (!st) {
                ++res.placement_failures;
                st = occ[u].fit(lo, p);
            }
            occ[u].add(*st, *st + p);
            out.slots[j] = {u, *st + p};
        }
    }
    detail::resequence_after(inst, out, max_release, delta);

    for (int u = 0; u < inst.m(); ++u) {
        double before = 0;
        for (const auto& b : bands) before += detail::subset_pseudo(inst, b.schedule, geo, u);
        double after = detail::subset_pseudo(inst, out, geo, u);
        if (before > 0) res.machine_ratio.push_back(after / before);
    }
    res.schedule = std::move(out);
    return res;
}

// ---- combining sub-instances ----

CombinePartsResult combine_subinstances(const Instance& inst, const std::vector<PartSchedule>& parts, double delta) {
    Geo geo(delta);
    CombinePartsResult res;
    const int n = inst.n();
    std::vector<int> owner(n, -1);
    for (size_t p = 0; p < parts.size(); ++p) {
        if (static_cast<int>(parts[p].schedule.slots.size()) != n)
            throw ValidationError("part schedule does not match the instance");
        for (int j = 0; j < n; ++j)
            if (parts[p].schedule.slots[j].machine >= 0) {
                if (owner[j] >= 0) throw ValidationError("job appears in two part schedules");
                owner[j] = static_cast<int>(p);
            }
    }
    for (int j = 0; j < n; ++j)
        if (owner[j] < 0) throw ValidationError("job missing from every part schedule");

    TimedSchedule out;
    out.slots.assign(n, {});
    std::vector<Occupancy> occ(inst.m());
    // per part: stretched schedule (on part indices) and the overflow sets
    struct PartWork {
        std::vector<int> jobs;
        StretchedSchedule st;
        TimedSchedule stretched;
        Instance sub;
    };
    std::vector<PartWork> work(parts.size());
    for (size_t p = 0; p < parts.size(); ++p) {
        PartWork& w = work[p];
        for (int j = 0; j < n; ++j)
            if (owner[j] == static_cast<int>(p)) w.jobs.push_back(j);
        if (w.jobs.empty()) continue;
        w.sub = sub_instance(inst, w.jobs);
        TimedSchedule local;
        for (int j : w.jobs) local.slots.push_back(parts[p].schedule.slots[j]);
        // remove idle after psi/(1+d)
        const double h = parts[p].psi / (1 + delta);
        for (int l = 0; l < inst.m(); ++l) {
            std::vector<int> v;
            for (int x = 0; x < w.sub.n(); ++x)
                if (local.slots[x].machine == l) v.push_back(x);
            std::sort(v.begin(), v.end(),
                      [&](int a, int b) { return local.slots[a].completion < local.slots[b].completion; });
            double cur = h;
            for (int x : v) {
                double st = start_of(w.sub, local, x);
                if (st < h) {
                    cur = std::max(cur, local.slots[x].completion);
                    continue;
                }
                double ns = detail::earliest_start(w.sub, x, l, cur, delta);
                ns = std::min(ns, st);
                local.slots[x].completion = ns + proc(w.sub, x, l);
                cur = local.slots[x].completion;
            }
        }
        w.st = time_stretch(w.sub, local, delta);
        w.stretched = w.st.actual();
    }

    // frame owner of a time point
    auto frame_of = [&](double x) -> int {
        double lo = 0;
        for (size_t p = 0; p < parts.size(); ++p) {
            if (x >= lo && x < parts[p].psi_next) return static_cast<int>(p);
            lo = parts[p].psi_next;
        }
        return -1;
    };
    auto is_gap = [&](int l, int64_t t) {
        int p = frame_of(geo.value(t));
        if (p < 0 || work[p].jobs.empty()) return true;
        auto it = work[p].st.gaps.find({l, t});
        if (it == work[p].st.gaps.end()) return true;
        return !it->second.covered && it->second.idle >= it->second.required * (1 - 1e-9);
    };

    struct Overflow {
        int part;
        int machine;
        std::vector<std::vector<int>> sets;  // S_{i,l}, l >= 1, instance indices
    };
    std::vector<Overflow> overflow;
    for (size_t p = 0; p < parts.size(); ++p) {
        PartWork& w = work[p];
        if (w.jobs.empty()) continue;
        const double next = parts[p].psi_next;
        for (int l = 0; l < inst.m(); ++l) {
            std::vector<int> late;
            for (int x = 0; x < w.sub.n(); ++x) {
                if (w.stretched.slots[x].machine != l) continue;
                if (w.stretched.slots[x].completion < next) {
                    int j = w.jobs[x];
                    out.slots[j] = w.stretched.slots[x];
                    occ[l].add(start_of(w.sub, w.stretched, x), w.stretched.slots[x].completion);
                } else {
                    late.push_back(x);
                }
            }
            if (late.empty()) continue;
            // overflow windows use the stretched start times
            std::sort(late.begin(), late.end(), [&](int a, int b) {
                return start_of(w.sub, w.stretched, a) < start_of(w.sub, w.stretched, b);
            });
            const double mu = start_of(w.sub, w.stretched, late[0]);
            Overflow of{static_cast<int>(p), l, {}};
            for (int x : late) {
                size_t idx = static_cast<size_t>(std::floor((start_of(w.sub, w.stretched, x) - mu) / next));
                if (of.sets.size() <= idx) of.sets.resize(idx + 1);
                of.sets[idx].push_back(w.jobs[x]);
            }
            res.overflow_jobs += static_cast<int>(late.size());
            overflow.push_back(std::move(of));
        }
    }

    std::map<std::pair<int, int64_t>, double> host_load;
    for (auto& of : overflow) {
        const int p = of.part, l = of.machine;
        const double next = parts[p].psi_next;
        const double speed = inst.machines[l].speed;
        int64_t t = geo.ceil_log(next / std::pow(delta, 5));
        double delay = 0, base = 0;
        const PartWork& w = work[p];
        for (int x = 0; x < w.sub.n(); ++x) {
            if (w.stretched.slots[x].machine != l) continue;
            double st = start_of(w.sub, w.stretched, x);
            if (st >= next / 2 && st < 0.75 * next)
                base += w.sub.jobs[x].weight * geo.value(geo.interval_index(w.stretched.slots[x].completion) + 1);
        }
        for (auto& set : of.sets) {
            if (set.empty()) continue;
            while (!is_gap(l, t)) ++t;
            for (int j : set) {
                double pj = proc(inst, j, l);
                double lo = detail::earliest_start(inst, j, l, geo.value(t), delta);
                auto st = occ[l].fit(lo, pj, geo.value(t + 1));
                if (!st) {
                    ++res.placement_failures;
                    st = occ[l].fit(lo, pj);
                }
                occ[l].add(*st, *st + pj);
                out.slots[j] = {l, *st + pj};
                host_load[{l, t}] += pj;
                int x = static_cast<int>(std::find(w.jobs.begin(), w.jobs.end(), j) - w.jobs.begin());
                double old_c = w.stretched.slots[x].completion;
                delay += inst.jobs[j].weight * (geo.value(geo.interval_index(*st + pj) + 1) -
                                                geo.value(geo.interval_index(old_c) + 1));
            }
            ++t;
        }
        (void)speed;
        res.delay_vs_base.push_back({delay, base});
    }
    for (const auto& [key, load] : host_load)
        res.hosts.push_back({key.first, key.second, load, std::pow(delta, 4) * geo.value(key.second)});

    for (int u = 0; u < inst.m(); ++u) {
        double before = 0;
        for (const auto& p : parts) before += detail::subset_pseudo(inst, p.schedule, geo, u);
        double after = detail::subset_pseudo(inst, out, geo, u);
        if (before > 0) res.machine_ratio.push_back(after / before);
    }
    res.schedule = std::move(out);
    return res;
}

// ---- end to end ----

std::string release_ledger_csv(const std::vector<ReleaseLedgerRow>& rows) {
    std::ostringstream os;
    os.precision(12);
    os << "stage,k,zeta,part,band,z_star,value,check\n";
    for (const auto& r : rows)
        os << r.stage << ',' << r.k << ',' << r.zeta << ',' << r.part << ',' << r.band << ',' << r.z_star << ','
           << r.value << ',' << r.check << '\n';
    return os.str();
}

namespace {

TimedSchedule embed(const TimedSchedule& local, const std::vector<int>& jobs, int n) {
    TimedSchedule out;
    out.slots.assign(n, {});
    for (size_t x = 0; x < jobs.size(); ++x) out.slots[jobs[x]] = local.slots[x];
    return out;
}

}  // namespace

ReleaseResult eptas_release(const Instance& a, const ParamPack& params, const ReleaseOptions& opt) {
    a.check();
    if (a.jobs.empty()) throw DomainError("instance has no jobs");
    ReleaseParams rp = ReleaseParams::from(params);
    Geo geo = rp.geo();
    Instance ap = round_release(a, params);
    ReleaseResult res;

    if (a.m() < rp.min_machines && !opt.force_pipeline) {
        if (a.n() > opt.oracle_max_jobs || a.m() > opt.oracle_max_machines)
            throw UnsupportedError("fewer than 2/d^7+3 machines and the instance exceeds the exact-search limits");
        OracleLimits lim = release_limits();
        lim.max_jobs = opt.oracle_max_jobs;
        lim.max_machines = opt.oracle_max_machines;
        lim.objective = Objective::pseudo_cost;
        lim.timely = true;
        lim.delta = rp.delta;
        TimedResult r = opt_release(ap, lim);
        res.schedule = r.schedule;
        res.fallback = true;
        res.ledger.push_back({"fallback", 0, 0, 0, 0, 0, r.value, "exact"});
    } else {
        JobShiftResult js = job_shift(ap);
        const Instance& tilde = js.shifted;
        res.ledger.push_back({"job_shift", 0, 0, 0, 0, 0, 0, js.within_bound ? "ok" : "bound"});
        const int components = rp.fast_machines(a.m());

        auto solve_part = [&](const Instance& sub, int64_t k, int64_t part) -> TimedSchedule {
            double R = 0;
            for (const auto& j : sub.jobs) R = std::max(R, j.release);
            TimedSchedule best;
            double best_v = kInf;
            for (int64_t zeta : relevant_zetas(sub, params)) {
                Instance shifted = density_shift(sub, zeta, params);
                std::vector<BandSchedule> bands;
                double zsum = 0;
                for (const Band& band : split_into_bands(shifted, zeta, params)) {
                    Instance bi = sub_instance(shifted, band.jobs);
                    BoundedResult br = solve_bounded_release(bi, rp);
                    zsum += br.z_star;
                    TimedSchedule st = time_stretch(bi, br.schedule, rp.delta).actual();
                    bands.push_back({band.run, embed(st, band.jobs, sub.n())});
                    res.ledger.push_back({"band", k, zeta, part, band.run, br.z_star,
                                          pseudo_cost(bi, br.schedule, geo).total,
                                          br.rounding.appended == 0 ? "ok" : "appended"});
                }
                CombineBandsResult cb = combine_density_bands(shifted, bands, rp.delta, R, components);
                validate(sub, cb.schedule);
                double v = pseudo_cost(sub, cb.schedule, geo).total;
                res.ledger.push_back({"combine_bands", k, zeta, part, -1, zsum, v,
                                      cb.audits_pass(rp.delta) ? "ok" : "audit"});
                if (v < best_v) {
                    best_v = v;
                    best = cb.schedule;
                }
            }
            return best;
        };

        auto solver = [&](const Instance& ak, int64_t k) -> TimedSchedule {
            ReleaseShift sh = release_shift(tilde, k, rp);
            const int64_t theta = min_release_exp(tilde);
            std::vector<PartSchedule> parts;
            for (size_t i = 0; i < sh.parts.size(); ++i) {
                PartSchedule ps;
                ps.psi = rp.psi(static_cast<int64_t>(i), k, theta);
                ps.psi_next = rp.psi(static_cast<int64_t>(i), k + 1, theta);
                if (sh.parts[i].empty()) {
                    ps.schedule.slots.assign(ak.n(), {});
                } else {
                    Instance sub = sub_instance(ak, sh.parts[i]);
                    ps.schedule = embed(solve_part(sub, k, static_cast<int64_t>(i)), sh.parts[i], ak.n());
                }
                parts.push_back(std::move(ps));
            }
            CombinePartsResult cp = combine_subinstances(ak, parts, rp.delta);
            res.ledger.push_back({"combine_parts", k, 0, -1, -1, 0, pseudo_cost(ak, cp.schedule, geo).total,
                                  cp.placement_failures == 0 ? "ok" : "placement"});
            return cp.schedule;
        };
        auto measure = [&](const Instance& ak, const TimedSchedule& s) { return pseudo_cost(ak, s, geo).total; };
        ChosenK ck = choose_k(tilde, rp, solver, measure);
        res.k = ck.k;
        res.schedule = ck.schedule;
        res.ledger.push_back({"choose_k", ck.k, 0, -1, -1, 0, ck.value, "ok"});
    }
    validate(ap, res.schedule);
    validate(a, res.schedule);
    res.pseudo_cost = pseudo_cost(ap, res.schedule, geo).total;
    res.cost = cost(a, res.schedule).total;
    return res;
}

}  // namespace wct
