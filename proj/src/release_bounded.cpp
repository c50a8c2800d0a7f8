#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

#include "release_internal.hpp"
#include "wct/release_eptas.hpp"

namespace wct {

using detail::Occupancy;
using detail::proc;
using detail::start_of;

BoundedSetup bounded_setup(const Instance& inst, const ReleaseParams& rp) {
    if (!inst.rounded()) throw DomainError("bounded instances must be rounded");
    Geo geo = rp.geo();
    BoundedSetup bs;
    bs.delta = rp.delta;
    bs.y = rp.y;
    bs.config_cap = rp.config_cap;
    bs.budget = rp.budget;
    const int64_t theta = inst.n() > 0 ? min_release_exp(inst) : 0;
    const double rmin = geo.value(theta);
    double R = 0, smax = 0, total = 0;
    for (const auto& j : inst.jobs) R = std::max(R, j.release);
    for (const auto& m : inst.machines) smax = std::max(smax, m.speed);
    for (const auto& j : inst.jobs) total += j.size;
    const double L = (1 + rp.delta) * (1 + rp.delta) * (R + total / smax);
    bs.t_hi = geo.ceil_log(L);
    bs.gamma = rp.gamma_r(R / rmin) * rmin;
    bs.components = rp.fast_machines(inst.m());
    bs.slow_cutoff = rp.slow_cutoff(R / rmin + 1, L);
    bs.palette = full_palette(inst, bs.components, theta, bs.t_hi);
    return bs;
}

Preprocessed preprocess_bounded(const Instance& inst, const BoundedSetup& bs) {
    Geo geo(bs.delta);
    Preprocessed out;
    out.fragment.slots.assign(inst.n(), {});
    auto rank = speed_rank(inst);
    std::map<int64_t, std::vector<int>> by_t;
    for (int j = 0; j < inst.n(); ++j) by_t[inst.jobs[j].release_e.exponent].push_back(j);
    std::vector<double> cursor(inst.m(), 0);
    std::vector<char> removed(inst.n(), 0);
    const double d4 = std::pow(bs.delta, 4);
    for (const auto& [t, jobs] : by_t) {
        int host = rank.empty() ? -1 : rank[0];
        for (size_t c = 0; c < bs.palette.machines.size(); ++c)
            if (bs.palette.allows(c, t)) {
                host = bs.palette.machines[c];
                break;
            }
        if (host < 0) continue;
        double total = 0;
        for (int j : jobs) total += proc(inst, j, host);
        if (total > d4 * geo.value(t) * (1 + kSnap)) continue;
        double cur = std::max(cursor[host], geo.value(t));
        for (int j : jobs) {
            double st = detail::earliest_start(inst, j, host, cur, bs.delta);
            out.fragment.slots[j] = {host, st + proc(inst, j, host)};
            cur = st + proc(inst, j, host);
            removed[j] = 1;
            out.removed.push_back(j);
        }
        cursor[host] = cur;
    }
    for (int j = 0; j < inst.n(); ++j)
        if (!removed[j]) out.kept.push_back(j);
    return out;
}

std::vector<MachineType> machine_types(const Instance& inst, const BoundedSetup& bs) {
    auto rank = speed_rank(inst);
    std::vector<MachineType> out;
    const int comps = std::min(bs.components, inst.m());
    for (int c = 0; c < comps; ++c) out.push_back({{rank[c]}, inst.machines[rank[c]].speed_e.exponent, true});
    if (comps < inst.m()) {
        const double s_hat = inst.machines[rank[comps]].speed;
        std::map<int64_t, MachineType, std::greater<>> groups;
        for (int c = comps; c < inst.m(); ++c) {
            const Machine& m = inst.machines[rank[c]];
            MachineType& g = groups[m.speed_e.exponent];
            g.speed_e = m.speed_e.exponent;
            g.fast = m.speed >= bs.slow_cutoff * s_hat;
            g.machines.push_back(rank[c]);
        }
        for (auto& [e, g] : groups) out.push_back(std::move(g));
    }
    return out;
}

std::map<RType, int> rtype_counts(const Instance& inst, const std::vector<int>& jobs) {
    std::map<RType, int> out;
    for (int j : jobs) {
        const Job& jb = inst.jobs[j];
        ++out[{jb.density_exp(), jb.size_e.exponent, jb.release_e.exponent}];
    }
    return out;
}

std::optional<double> virtual_schedule_cost(const ConfigurationR& c, const BoundedSetup& bs) {
    Geo geo(bs.delta);
    const double speed = geo.value(c.speed_e);
    struct Item {
        double size, density;
    };
    std::map<int64_t, std::vector<Item>> windows;
    for (const auto& [key, cnt] : c.large) {
        const auto& [rt, w] = key;
        if (rt.t > w) return std::nullopt;
        for (int x = 0; x < cnt; ++x) windows[w].push_back({geo.value(rt.i), geo.value(rt.r)});
    }
    for (const auto& [key, level] : c.small) {
        const auto& [r, w, t] = key;
        if (t > w) return std::nullopt;
        if (level > 1) windows[w].push_back({static_cast<double>(level - 1) * bs.gamma * speed, geo.value(r)});
    }
    double cost = 0, last = 0;
    for (auto& [w, items] : windows) {
        std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.size < b.size; });
        const double a = geo.value(w), b = geo.value(w + 1);
        for (const Item& it : items) {
            double st = std::max(a, last);
            if (st >= b * (1 - kSnap)) return std::nullopt;
            if (st < bs.delta * it.size / speed * (1 - kSnap)) return std::nullopt;
            double done = st + it.size / speed;
            cost += it.size * it.density * geo.value(geo.interval_index(done) + 1);
            last = done;
        }
    }
    return cost;
}

namespace {

bool is_small(const RType& rt, double speed, const BoundedSetup& bs, const Geo& geo) {
    return geo.value(rt.i) / speed < bs.gamma * (1 - kSnap);
}

bool is_large(const RType& rt, double speed, const BoundedSetup& bs, const Geo& geo) {
    double p = geo.value(rt.i) / speed;
    return !is_small(rt, speed, bs, geo) && p < geo.value(bs.t_hi) * (1 - kSnap);
}

std::optional<size_t> component_of(const MachineType& mt, const BoundedSetup& bs) {
    if (mt.machines.size() != 1) return std::nullopt;
    for (size_t c = 0; c < bs.palette.machines.size(); ++c)
        if (bs.palette.machines[c] == mt.machines[0]) return c;
    return std::nullopt;
}

}  // namespace

std::vector<ConfigurationR> enumerate_release_configs(const Instance& inst, const std::vector<int>& jobs,
                                                      const std::vector<MachineType>& types, const BoundedSetup& bs) {
    Geo geo(bs.delta);
    const auto counts = rtype_counts(inst, jobs);
    const double d5 = std::pow(bs.delta, 5);
    std::vector<ConfigurationR> out;
    for (size_t ti = 0; ti < types.size(); ++ti) {
        const MachineType& mt = types[ti];
        const double speed = geo.value(mt.speed_e);
        const auto comp = component_of(mt, bs);
        auto window_ok = [&](int64_t w) { return !comp || bs.palette.allows(*comp, w); };

        std::vector<std::pair<RType, int>> large;
        std::map<std::pair<int64_t, int64_t>, double> small;  // (r, t) -> total size
        for (const auto& [rt, cnt] : counts) {
            if (is_large(rt, speed, bs, geo))
                large.push_back({rt, cnt});
            else if (is_small(rt, speed, bs, geo))
                small[{rt.r, rt.t}] += geo.value(rt.i) * cnt;
        }
        std::vector<std::vector<int64_t>> wins(large.size());
        for (size_t x = 0; x < large.size(); ++x) {
            const RType& rt = large[x].first;
            for (int64_t w = rt.t; w <= bs.t_hi; ++w)
                if (window_ok(w) && geo.value(w + 1) > bs.delta * geo.value(rt.i) / speed) wins[x].push_back(w);
        }

        // The program sees a configuration only through its cost, its large-job
        // counts per type and its small slots, so placements that agree on the
        // last two are collapsed to the cheapest one.
        using Key = std::pair<std::map<RType, int>, std::map<std::tuple<int64_t, int64_t, int64_t>, int64_t>>;
        std::map<Key, ConfigurationR> best;
        size_t visited = 0;
        const size_t visit_cap = 50 * bs.config_cap;
        auto overflow = [&] {
            if (best.size() > bs.config_cap)
                throw RefusalError("more than " + std::to_string(bs.config_cap) + " configurations for one machine type");
            if (++visited > visit_cap)
                throw RefusalError("more than " + std::to_string(visit_cap) + " placements for one machine type");
        };
        auto keep = [&](ConfigurationR c) {
            overflow();
            std::map<int64_t, double> load;
            for (const auto& [key, cnt] : c.large) load[key.second] += geo.value(key.first.i) * cnt;
            for (const auto& [key, level] : c.small) load[std::get<1>(key)] += static_cast<double>(level) * bs.gamma * speed;
            if (!comp)
                for (const auto& [w, l] : load)
                    if (l > 0 && l <= d5 * geo.value(w) * speed) return;
            auto v = virtual_schedule_cost(c, bs);
            if (!v) return;
            c.cost = *v;
            c.busy = 0;
            for (const auto& [w, l] : load) c.busy += l;
            Key k;
            for (const auto& [key, cnt] : c.large) k.first[key.first] += cnt;
            k.second = c.small;
            auto it = best.find(k);
            if (it == best.end())
                best.emplace(std::move(k), std::move(c));
            else if (c.cost < it->second.cost)
                it->second = std::move(c);
        };

        // each small class goes whole into one window, or stays off the machine
        std::vector<std::pair<std::pair<int64_t, int64_t>, double>> classes(small.begin(), small.end());
        std::function<void(size_t, ConfigurationR&)> add = [&](size_t x, ConfigurationR& c) {
            if (x == classes.size()) {
                keep(c);
                return;
            }
            add(x + 1, c);
            const auto [r, t] = classes[x].first;
            const int64_t level =
                std::max<int64_t>(1, static_cast<int64_t>(std::ceil(classes[x].second / (bs.gamma * speed) - 1e-9)));
            for (int64_t w = t; w <= bs.t_hi; ++w) {
                if (!window_ok(w)) continue;
                const auto key = std::make_tuple(r, w, t);
                c.small[key] = level;
                if (virtual_schedule_cost(c, bs)) add(x + 1, c);
                c.small.erase(key);
            }
        };

        ConfigurationR cur;
        cur.type = static_cast<int>(ti);
        cur.speed_e = mt.speed_e;
        // distribute up to cnt jobs of large type x over its windows, from window index wi on
        std::function<void(size_t, size_t, int)> dfs = [&](size_t x, size_t wi, int left) {
            if (x == large.size()) {
                ConfigurationR c = cur;
                add(0, c);
                return;
            }
            if (wi == wins[x].size() || left == 0) {
                dfs(x + 1, 0, x + 1 < large.size() ? large[x + 1].second : 0);
                return;
            }
            dfs(x, wi + 1, left);
            const auto key = std::make_pair(large[x].first, wins[x][wi]);
            for (int c = 1; c <= left; ++c) {
                cur.large[key] = c;
                if (!virtual_schedule_cost(cur, bs)) break;
                dfs(x, wi + 1, left - c);
            }
            cur.large.erase(key);
        };
        dfs(0, 0, large.empty() ? 0 : large[0].second);

        std::vector<ConfigurationR> kept;
        for (auto& [k, c] : best) kept.push_back(std::move(c));
        std::sort(kept.begin(), kept.end(), [](const ConfigurationR& a, const ConfigurationR& b) {
            return std::tie(a.large, a.small) < std::tie(b.large, b.small);
        });
        for (auto& c : kept) out.push_back(std::move(c));
    }
    return out;
}

PiRelease build_pi_release(const Instance& inst, const std::vector<int>& jobs, const std::vector<MachineType>& types,
                           const std::vector<ConfigurationR>& configs, const BoundedSetup& bs) {
    Geo geo(bs.delta);
    const auto counts = rtype_counts(inst, jobs);
    PiRelease pi;
    LinearModel& lm = pi.model;
    for (size_t c = 0; c < configs.size(); ++c) {
        const MachineType& mt = types[configs[c].type];
        pi.x_var.push_back(lm.add_var("x" + std::to_string(c), configs[c].cost, 0,
                                      static_cast<double>(mt.machines.size()), mt.fast));
    }
    for (size_t c = 0; c < configs.size(); ++c) {
        const double speed = geo.value(configs[c].speed_e);
        for (const auto& [key, level] : configs[c].small) {
            const auto& [r, w, t] = key;
            for (const auto& [rt, cnt] : counts) {
                if (rt.r != r || rt.t != t || !is_small(rt, speed, bs, geo)) continue;
                pi.y_var[{static_cast<int>(c), rt, w}] =
                    lm.add_var("y" + std::to_string(c) + "_" + std::to_string(rt.i) + "_" + std::to_string(w), 0);
            }
        }
    }
    for (size_t ti = 0; ti < types.size(); ++ti) {
        std::vector<std::pair<int, double>> terms;
        for (size_t c = 0; c < configs.size(); ++c)
            if (configs[c].type == static_cast<int>(ti)) terms.push_back({pi.x_var[c], 1.0});
        lm.add_constraint("machines" + std::to_string(ti), terms, Relation::eq,
                          static_cast<double>(types[ti].machines.size()));
    }
    for (const auto& [rt, cnt] : counts) {
        std::vector<std::pair<int, double>> terms;
        for (size_t c = 0; c < configs.size(); ++c) {
            int n = 0;
            for (const auto& [key, k] : configs[c].large)
                if (key.first == rt) n += k;
            if (n > 0) terms.push_back({pi.x_var[c], static_cast<double>(n)});
        }
        for (const auto& [key, var] : pi.y_var)
            if (std::get<1>(key) == rt) terms.push_back({var, 1.0});
        lm.add_constraint("jobs_r" + std::to_string(rt.r) + "_i" + std::to_string(rt.i) + "_t" + std::to_string(rt.t),
                          terms, Relation::eq, static_cast<double>(cnt));
    }
    for (size_t c = 0; c < configs.size(); ++c) {
        const double speed = geo.value(configs[c].speed_e);
        for (const auto& [key, level] : configs[c].small) {
            const auto& [r, w, t] = key;
            std::vector<std::pair<int, double>> terms;
            for (const auto& [yk, var] : pi.y_var) {
                const auto& [yc, rt, yw] = yk;
                if (yc == static_cast<int>(c) && yw == w && rt.r == r && rt.t == t)
                    terms.push_back({var, geo.value(rt.i)});
            }
            if (terms.empty()) continue;
            terms.push_back({pi.x_var[c], -static_cast<double>(level) * bs.gamma * speed});
            lm.add_constraint("small" + std::to_string(c) + "_w" + std::to_string(w), terms, Relation::le, 0);
        }
    }
    return pi;
}

RoundedRelease round_pi_release(const MilpSolution& sol, const Instance& inst, const std::vector<int>& jobs,
                                const std::vector<MachineType>& types, const std::vector<ConfigurationR>& configs,
                                const PiRelease& pi, const BoundedSetup& bs, int pink_machine) {
    Geo geo(bs.delta);
    RoundedRelease out;
    out.schedule.slots.assign(inst.n(), {});
    std::map<RType, std::deque<int>> pool;
    {
        std::vector<int> sorted = jobs;
        std::sort(sorted.begin(), sorted.end());
        for (int j : sorted) {
            const Job& jb = inst.jobs[j];
            pool[{jb.density_exp(), jb.size_e.exponent, jb.release_e.exponent}].push_back(j);
        }
    }
    auto take = [&](const RType& rt, int64_t n, std::vector<std::pair<int, int64_t>>& into, int64_t w) {
        auto& q = pool[rt];
        for (int64_t x = 0; x < n && !q.empty(); ++x) {
            into.push_back({q.front(), w});
            q.pop_front();
        }
    };

    std::vector<size_t> next_machine(types.size(), 0);
    std::vector<std::vector<std::pair<int, int64_t>>> assigned(inst.m());  // (job, window)
    for (size_t c = 0; c < configs.size(); ++c) {
        const double x = sol.values[pi.x_var[c]];
        const int copies = static_cast<int>(std::floor(x + 1e-6));
        const MachineType& mt = types[configs[c].type];
        for (int k = 0; k < copies && next_machine[configs[c].type] < mt.machines.size(); ++k) {
            int l = mt.machines[next_machine[configs[c].type]++];
            for (const auto& [key, cnt] : configs[c].large) take(key.first, cnt, assigned[l], key.second);
            if (x <= 1e-9) continue;
            for (const auto& [yk, var] : pi.y_var) {
                const auto& [yc, rt, w] = yk;
                if (yc != static_cast<int>(c)) continue;
                double y = sol.values[var];
                if (y <= 1e-9) continue;
                take(rt, static_cast<int64_t>(std::ceil(y / x - 1e-9)), assigned[l], w);
            }
        }
    }
    std::vector<Occupancy> occ(inst.m());
    for (int l = 0; l < inst.m(); ++l) {
        auto& v = assigned[l];
        std::sort(v.begin(), v.end(), [&](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second < b.second;
            if (inst.jobs[a.first].size != inst.jobs[b.first].size)
                return inst.jobs[a.first].size < inst.jobs[b.first].size;
            return a.first < b.first;
        });
        double cur = 0;
        for (const auto& [j, w] : v) {
            double st = detail::earliest_start(inst, j, l, std::max(cur, geo.value(w)), bs.delta);
            cur = st + proc(inst, j, l);
            out.schedule.slots[j] = {l, cur};
            occ[l].add(st, cur);
        }
    }

    int v = pink_machine;
    if (v < 0) v = speed_rank(inst)[0];
    const int64_t theta = min_release_exp(inst);
    out.leftover_bound = std::pow(bs.delta, 5) * inst.machines[v].speed * geo.value(theta);
    for (auto& [rt, q] : pool)
        for (int j : q) {
            const double p = proc(inst, j, v);
            const int64_t t = inst.jobs[j].release_e.exponent;
            const double lo = detail::earliest_start(inst, j, v, geo.value(t), bs.delta);
            auto st = occ[v].fit(lo, p, geo.value(t + 1));
            if (!st) {
                ++out.appended;
                st = occ[v].fit(lo, p);
            }
            occ[v].add(*st, *st + p);
            out.schedule.slots[j] = {v, *st + p};
            out.leftover_size += inst.jobs[j].size;
            ++out.leftover_jobs;
        }
    return out;
}

BoundedResult solve_bounded_release(const Instance& inst, const ReleaseParams& rp) {
    BoundedResult res;
    BoundedSetup bs = bounded_setup(inst, rp);
    res.pre = preprocess_bounded(inst, bs);
    const auto& kept = res.pre.kept;
    auto rank = speed_rank(inst);
    TimedSchedule sched;
    sched.slots.assign(inst.n(), {});
    if (!kept.empty()) {
        auto types = machine_types(inst, bs);
        auto configs = enumerate_release_configs(inst, kept, types, bs);
        res.configs = configs.size();
        PiRelease pi = build_pi_release(inst, kept, types, configs, bs);
        MilpSolution sol = solve_milp(pi.model, bs.budget);
        res.nodes = sol.nodes;
        if (sol.status != MilpStatus::optimal && !sol.has_incumbent)
            throw RefusalError("bounded program: " + to_string(sol.status));
        res.z_star = sol.objective;
        int pink = rank[std::min(1, inst.m() - 1)];
        if (auto c = bs.palette.pink_component()) pink = bs.palette.machines[*c];
        res.rounding = round_pi_release(sol, inst, kept, types, configs, pi, bs, pink);
        sched = res.rounding.schedule;
    }
    auto occ = detail::occupancy(inst, sched);
    for (int j : res.pre.removed) {
        const int l = res.pre.fragment.slots[j].machine;
        const double p = proc(inst, j, l);
        const double want = start_of(inst, res.pre.fragment, j);
        auto st = occ[l].fit(detail::earliest_start(inst, j, l, want, rp.delta), p);
        occ[l].add(*st, *st + p);
        sched.slots[j] = {l, *st + p};
    }
    validate(inst, sched);
    res.schedule = std::move(sched);
    return res;
}

}  // namespace wct
