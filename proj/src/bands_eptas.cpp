#include "wct/bands_eptas.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

namespace wct {

NRParams NRParams::from(const ParamPack& p) {
    NRParams n;
    n.delta = p.delta;
    n.y = p.y;
    n.gamma = p.gamma;
    n.g_delta = p.g_delta;
    n.f_delta = p.f_delta;
    return n;
}

int64_t NRParams::log_gamma() const {
    if (!(gamma > 0)) throw DomainError("gamma underflows; configurations cannot be enumerated");
    return geo().ceil_log(gamma);
}

std::vector<ScaleGuess> scale_guesses(const Instance& band, const NRParams& p) {
    Geo geo(p.delta);
    const int64_t bmax = band.n() * static_cast<int64_t>(std::llround(1.0 / p.delta));
    std::vector<ScaleGuess> out;
    for (int j = 0; j < band.n(); ++j) {
        const Job& job = band.jobs[j];
        for (int64_t b = 1; b <= bmax; ++b) {
            ScaleGuess g;
            g.job = j;
            g.b = b;
            g.lo = geo.value(b - 1) * job.size;
            g.hi = geo.value(b) * job.size;
            g.shift = job.size_e.exponent + b;
            out.push_back(g);
        }
    }
    return out;
}

namespace {

int64_t max_speed_exp(const Instance& inst) {
    int64_t s = inst.machines.front().speed_e.exponent;
    for (const auto& m : inst.machines) s = std::max(s, m.speed_e.exponent);
    return s;
}

int64_t min_density_exp(const Instance& inst) {
    int64_t d = inst.jobs.front().density_exp();
    for (const auto& j : inst.jobs) d = std::min(d, j.density_exp());
    return d;
}

double type_size(const Geo& geo, const JobType& t) { return geo.value(t.second); }

}  // namespace

Instance scale_instance(const Instance& band, int64_t shift) {
    if (!band.rounded()) throw DomainError("scaling needs a rounded instance");
    Instance out = band;
    if (band.m() == 0) return out;
    const int64_t smax = max_speed_exp(band);
    const int64_t dmin = band.n() ? min_density_exp(band) : 0;
    for (auto& j : out.jobs) {
        int64_t r = j.density_exp() - dmin;
        j.size_e.exponent -= shift;
        j.weight_e.exponent = j.size_e.exponent + r;
    }
    for (auto& m : out.machines) m.speed_e.exponent -= smax;
    refresh_values(out, Geo(band.rounded_delta));
    return out;
}

double unscale_factor(const Instance& band, int64_t shift) {
    Geo geo(band.rounded_delta);
    const int64_t dmin = band.n() ? min_density_exp(band) : 0;
    return geo.value(dmin + 2 * shift - max_speed_exp(band));
}

std::map<JobType, int> type_counts(const Instance& scaled) {
    std::map<JobType, int> out;
    for (const auto& j : scaled.jobs) ++out[{j.density_exp(), j.size_e.exponent}];
    return out;
}

std::vector<ConfigurationNR> enumerate_configurations(const Instance& scaled, const NRParams& p) {
    std::vector<ConfigurationNR> out;
    if (scaled.n() == 0 || scaled.m() == 0) return out;
    Geo geo(p.delta);
    const int64_t lg = p.log_gamma();
    const auto counts = type_counts(scaled);

    std::set<int64_t, std::greater<>> speeds;
    for (const auto& m : scaled.machines) speeds.insert(m.speed_e.exponent);
    std::set<int64_t> j1s;
    for (const auto& j : scaled.jobs) {
        int64_t top = geo.ceil_log(scaled.n() * j.size);
        for (int64_t e = j.size_e.exponent; e <= top; ++e) j1s.insert(e);
    }
    const double load_cap = 2.0 / p.delta;

    for (int64_t j2 : speeds) {
        for (int64_t j1 : j1s) {
            if (geo.value(j1 - j2 - 2) >= load_cap * (1 - kSnap)) continue;
            const double hi = geo.value(j1) * (1 + kSnap);
            const double lo = geo.value(j1 - 2) * (1 + kSnap);
            const double unit = p.gamma * geo.value(j1 - 1);
            std::vector<std::pair<JobType, int>> large;
            std::map<int64_t, double> small_total;
            for (const auto& [t, c] : counts) {
                if (t.second > j1) continue;
                if (t.second >= j1 - 1 + lg) large.push_back({t, c});
                else small_total[t.first] += type_size(geo, t) * c;
            }
            std::vector<std::pair<int64_t, int64_t>> small;  // (r, max t_r)
            for (const auto& [r, tot] : small_total) {
                int64_t tmax = static_cast<int64_t>(std::floor(tot / unit + 1e-9));
                if (tmax > 0) small.push_back({r, tmax});
            }

            ConfigurationNR cur;
            cur.j1 = j1;
            cur.j2 = j2;
            cur.unit = unit;
            cur.heavy = j1 > p.g_delta;
            cur.fast = j2 > p.f_delta;
            auto rec_small = [&](auto&& self, size_t k, double work) -> void {
                if (k == small.size()) {
                    if (work > lo && work <= hi) {
                        cur.work = work;
                        out.push_back(cur);
                        if (out.size() > p.config_cap)
                            throw RefusalError("configuration count exceeds cap " + std::to_string(p.config_cap) +
                                               " (at least " + std::to_string(out.size()) + ")");
                    }
                    return;
                }
                for (int64_t t = 0; t <= small[k].second; ++t) {
                    double w = work + t * unit;
                    if (w > hi) break;
                    if (t) cur.small[small[k].first] = t;
                    self(self, k + 1, w);
                }
                cur.small.erase(small[k].first);
            };
            auto rec_large = [&](auto&& self, size_t k, double work) -> void {
                if (k == large.size()) {
                    rec_small(rec_small, 0, work);
                    return;
                }
                const double sz = type_size(geo, large[k].first);
                for (int c = 0; c <= large[k].second; ++c) {
                    double w = work + c * sz;
                    if (w > hi) break;
                    if (c) cur.large[large[k].first] = c;
                    self(self, k + 1, w);
                }
                cur.large.erase(large[k].first);
            };
            rec_large(rec_large, 0, 0.0);
        }
    }
    return out;
}

double config_cost(const ConfigurationNR& c, const NRParams& p) {
    Geo geo(p.delta);
    const double speed = geo.value(c.j2);
    std::set<int64_t, std::greater<>> densities;
    for (const auto& [t, n] : c.large) densities.insert(t.first);
    for (const auto& [r, t] : c.small) densities.insert(r);
    double done = 0, total = 0;
    for (int64_t r : densities) {
        const double rho = geo.value(r);
        // Large jobs of this density, larger first.
        for (auto it = c.large.rbegin(); it != c.large.rend(); ++it) {
            if (it->first.first != r) continue;
            const double sz = geo.value(it->first.second);
            for (int k = 0; k < it->second; ++k) {
                done += sz;
                total += rho * sz * done / speed;
            }
        }
        auto s = c.small.find(r);
        if (s != c.small.end()) {
            const double tot = s->second * c.unit;
            total += block_gamma(tot, rho, done / speed, speed);
            done += tot;
        }
    }
    return total;
}

double config_cost_lower_bound(const ConfigurationNR& c, const NRParams& p) {
    Geo geo(p.delta);
    return geo.value(2 * c.j1 - 4) / (2.0 * geo.value(c.j2));
}

PiModel build_pi(const Instance& scaled, const std::vector<ConfigurationNR>& configs, const NRParams& p,
                 bool anchor) {
    Geo geo(p.delta);
    PiModel pi;
    auto& md = pi.model;
    const int64_t lg = configs.empty() ? 0 : p.log_gamma();
    const auto counts = type_counts(scaled);
    std::map<int64_t, int> machines_per_speed;
    for (const auto& m : scaled.machines) ++machines_per_speed[m.speed_e.exponent];

    for (size_t c = 0; c < configs.size(); ++c) {
        const auto& cf = configs[c];
        pi.cost.push_back(config_cost(cf, p));
        double ub = machines_per_speed[cf.j2];
        pi.x_var.push_back(md.add_var("X" + std::to_string(c), pi.cost.back(), 0, ub, cf.integral()));
    }
    for (size_t c = 0; c < configs.size(); ++c) {
        const auto& cf = configs[c];
        for (const auto& [t, n] : counts) {
            if (t.second > cf.j1 - 2 + lg) continue;
            double coef = geo.value(t.first + 2 * t.second - cf.j2) / 2.0;
            std::string name = "Y" + std::to_string(t.first) + "_" + std::to_string(t.second) + "_" + std::to_string(c);
            pi.y_var[{t, static_cast<int>(c)}] = md.add_var(name, coef, 0, n, false);
        }
    }
    // Machines per speed.
    for (const auto& [e, cnt] : machines_per_speed) {
        std::vector<std::pair<int, double>> terms;
        for (size_t c = 0; c < configs.size(); ++c)
            if (configs[c].j2 == e) terms.push_back({pi.x_var[c], 1.0});
        if (!terms.empty()) md.add_constraint("speed" + std::to_string(e), terms, Relation::le, cnt);
    }
    // Every job assigned.
    for (const auto& [t, n] : counts) {
        std::vector<std::pair<int, double>> terms;
        for (size_t c = 0; c < configs.size(); ++c) {
            auto it = configs[c].large.find(t);
            if (it != configs[c].large.end()) terms.push_back({pi.x_var[c], static_cast<double>(it->second)});
            auto y = pi.y_var.find({t, static_cast<int>(c)});
            if (y != pi.y_var.end()) terms.push_back({y->second, 1.0});
        }
        md.add_constraint("type" + std::to_string(t.first) + "_" + std::to_string(t.second), terms, Relation::eq, n);
    }
    // Space for small jobs per density and configuration.
    std::map<std::pair<int, int64_t>, std::vector<std::pair<int, double>>> space;
    for (const auto& [key, v] : pi.y_var) space[{key.second, key.first.first}].push_back({v, geo.value(key.first.second)});
    for (auto& [key, terms] : space) {
        const auto& cf = configs[key.first];
        auto s = cf.small.find(key.second);
        double t = s == cf.small.end() ? 0 : static_cast<double>(s->second);
        terms.push_back({pi.x_var[key.first], -(t + 1) * cf.unit});
        md.add_constraint("space" + std::to_string(key.second) + "_" + std::to_string(key.first), terms, Relation::le,
                          0);
    }
    // A speed-1 machine with work near 1.
    std::vector<std::pair<int, double>> terms;
    for (size_t c = 0; c < configs.size(); ++c)
        if ((configs[c].j1 == 0 || configs[c].j1 == -1) && configs[c].j2 == 0) terms.push_back({pi.x_var[c], 1.0});
    pi.has_anchor = !terms.empty();
    if (anchor) md.add_constraint("anchor", terms, Relation::ge, 1);
    return pi;
}

RoundedSchedule round_pi_solution(const MilpSolution& sol, const Instance& scaled,
                                  const std::vector<ConfigurationNR>& configs, const PiModel& pi,
                                  const NRParams& p) {
    Geo geo(p.delta);
    RoundedSchedule out;
    out.schedule.machines.assign(scaled.m(), {});
    if (sol.values.size() != pi.model.vars.size()) throw DomainError("solution does not match the model");

    // Rounded counts.
    std::vector<int> xr(configs.size());
    std::vector<double> xs(configs.size());
    for (size_t c = 0; c < configs.size(); ++c) {
        xs[c] = std::max(0.0, sol.values[pi.x_var[c]]);
        xr[c] = static_cast<int>(std::floor(xs[c] + 1e-6));
    }
    std::map<std::pair<JobType, int>, long> yr;
    for (const auto& [key, v] : pi.y_var) {
        const int c = key.second;
        const double ys = std::max(0.0, sol.values[v]);
        long val = 0;
        if (xs[c] > 1e-9 && xr[c] > 0) {
            if (configs[c].heavy) val = static_cast<long>(std::ceil(ys - 1e-6));
            else val = static_cast<long>(std::floor(xr[c] / xs[c] * ys + 1e-6));
        }
        if (val > 0) yr[key] = val;
    }

    // Machines of each speed, in index order.
    std::map<int64_t, std::deque<int>> free_machines;
    for (int i = 0; i < scaled.m(); ++i) free_machines[scaled.machines[i].speed_e.exponent].push_back(i);
    // Instances of configurations placed on machines.
    std::vector<std::vector<int>> inst_machine(configs.size());
    int anchor = -1;
    for (size_t c = 0; c < configs.size(); ++c) {
        for (int k = 0; k < xr[c]; ++k) {
            auto& q = free_machines[configs[c].j2];
            if (q.empty()) throw DomainError("rounded solution uses more machines than exist");
            int mi = q.front();
            q.pop_front();
            inst_machine[c].push_back(mi);
            if (anchor < 0 && configs[c].j2 == 0 && (configs[c].j1 == 0 || configs[c].j1 == -1)) anchor = mi;
        }
    }
    if (anchor < 0) {
        // No anchored configuration: fall back to the first fastest machine.
        for (int i = 0; i < scaled.m(); ++i)
            if (scaled.machines[i].speed_e.exponent == 0) {
                anchor = i;
                break;
            }
    }

    std::map<JobType, std::deque<int>> pool;
    for (int j = 0; j < scaled.n(); ++j)
        pool[{scaled.jobs[j].density_exp(), scaled.jobs[j].size_e.exponent}].push_back(j);
    auto take = [&](const JobType& t, int machine) {
        auto it = pool.find(t);
        if (it == pool.end() || it->second.empty()) return;
        out.schedule.machines[machine].push_back(it->second.front());
        it->second.pop_front();
    };

    // Large jobs of each configuration instance.
    for (size_t c = 0; c < configs.size(); ++c)
        for (int mi : inst_machine[c])
            for (const auto& [t, n] : configs[c].large)
                for (int k = 0; k < n; ++k) take(t, mi);

    // Small jobs: First Fit into bins of the first kind, then the second.
    const double second_kind = 3.0 * p.gamma / p.delta;
    for (size_t c = 0; c < configs.size(); ++c) {
        if (xr[c] == 0) continue;
        std::map<int64_t, std::vector<std::pair<int64_t, long>>> by_density;  // r -> (i, count)
        for (const auto& [key, cnt] : yr)
            if (key.second == static_cast<int>(c)) by_density[key.first.first].push_back({key.first.second, cnt});
        for (auto& [r, items] : by_density) {
            struct Bin {
                double cap, used;
                int machine;
            };
            std::vector<Bin> bins;
            auto t = configs[c].small.find(r);
            if (t != configs[c].small.end())
                for (int mi : inst_machine[c]) bins.push_back({t->second * configs[c].unit, 0, mi});
            for (int mi : inst_machine[c]) bins.push_back({second_kind * geo.value(configs[c].j1 - 1), 0, mi});
            std::sort(items.begin(), items.end(), [](auto& a, auto& b) { return a.first > b.first; });
            for (const auto& [i, cnt] : items) {
                const double sz = geo.value(i);
                for (long k = 0; k < cnt; ++k) {
                    bool placed = false;
                    for (auto& bn : bins) {
                        if (bn.used + sz <= bn.cap * (1 + kSnap)) {
                            bn.used += sz;
                            take({r, i}, bn.machine);
                            placed = true;
                            break;
                        }
                    }
                    if (!placed) ++out.ledger.overflow_items;
                }
            }
        }
    }

    // Whatever is left goes to the anchored speed-1 machine.
    for (auto& [t, q] : pool)
        while (!q.empty()) {
            out.ledger.unassigned_size += geo.value(t.second);
            ++out.ledger.leftover_jobs;
            out.schedule.machines[anchor].push_back(q.front());
            q.pop_front();
        }
    for (size_t c = 0; c < configs.size(); ++c)
        if (!configs[c].heavy && xs[c] > 1e-9) out.ledger.unassigned_bound += 2 * geo.value(configs[c].j1);
    out.schedule = naturalize(scaled, out.schedule);
    return out;
}

std::string ledger_csv(const std::vector<LedgerRow>& rows) {
    std::ostringstream os;
    os.precision(12);
    os << "stage,instance,zeta,guess,z_star,schedule_cost,oracle_cost,ratio\n";
    for (const auto& r : rows) {
        os << r.stage << "," << r.instance << "," << r.zeta << "," << r.guess << "," << r.z_star << ","
           << r.schedule_cost << ",";
        if (r.oracle_cost) os << *r.oracle_cost << "," << (*r.oracle_cost > 0 ? r.schedule_cost / *r.oracle_cost : 1.0);
        else os << ",";
        os << "\n";
    }
    return os.str();
}

BandResult solve_bounded_ratio(const Instance& band, const NRParams& p) {
    BandResult best;
    best.schedule.machines.assign(band.m(), {});
    if (band.n() == 0) return best;
    if (band.m() == 0) throw ValidationError("no machines");
    const std::string hash = instance_hash(band);
    bool found = false;
    double best_z = kInf;
    std::set<int64_t> seen;
    for (const auto& g : scale_guesses(band, p)) {
        if (!seen.insert(g.shift).second) continue;
        Instance scaled = scale_instance(band, g.shift);
        auto configs = enumerate_configurations(scaled, p);
        PiModel pi = build_pi(scaled, configs, p);
        if (!pi.has_anchor) continue;
        MilpSolution sol = solve_milp(pi.model, p.budget);
        best.nodes += sol.nodes;
        bool usable = sol.status == MilpStatus::optimal ||
                      (sol.status == MilpStatus::budget_exceeded && sol.has_incumbent);
        if (!usable) continue;
        ++best.guesses_tried;
        RoundedSchedule rs = round_pi_solution(sol, scaled, configs, pi, p);
        const double c = cost(band, rs.schedule).total;
        const double z = sol.objective * unscale_factor(band, g.shift);
        LedgerRow row;
        row.stage = "guess";
        row.instance = hash;
        row.guess = std::to_string(band.jobs[g.job].id) + ":" + std::to_string(g.b);
        row.z_star = z;
        row.schedule_cost = c;
        best.rows.push_back(row);
        if (sol.status == MilpStatus::optimal) best_z = std::min(best_z, z);
        if (!found || c < best.cost - kCostTol * std::max(1.0, best.cost)) {
            found = true;
            best.schedule = rs.schedule;
            best.cost = c;
            best.guess_job = g.job;
            best.guess_b = g.b;
            best.shift = g.shift;
            best.configs = configs.size();
            best.ledger = rs.ledger;
        }
    }
    if (!found) throw DomainError("no scaling guess admits a feasible configuration program");
    best.z_star = best_z;
    return best;
}

OrderedSchedule combine_band_solutions(const Instance& inst, const std::vector<OrderedSchedule>& bands) {
    OrderedSchedule out;
    out.machines.assign(inst.m(), {});
    for (const auto& b : bands) {
        if (static_cast<int>(b.machines.size()) != inst.m())
            throw ValidationError("band schedule has a different machine count");
        for (int i = 0; i < inst.m(); ++i)
            out.machines[i].insert(out.machines[i].end(), b.machines[i].begin(), b.machines[i].end());
    }
    return naturalize(inst, out);
}

Instance sub_instance(const Instance& inst, const std::vector<int>& jobs) {
    Instance out;
    out.machines = inst.machines;
    out.has_release = inst.has_release;
    out.rounded_delta = inst.rounded_delta;
    for (int j : jobs) out.jobs.push_back(inst.jobs[j]);
    return out;
}

NoReleaseResult eptas_no_release(const Instance& a, const ParamPack& params) {
    a.check();
    for (const auto& j : a.jobs)
        if (j.release > 0) throw UnsupportedError("instance has release dates");
    NRParams nrp = NRParams::from(params);
    const std::string hash = instance_hash(a);
    NoReleaseResult res;
    res.schedule.machines.assign(a.m(), {});
    if (a.n() == 0) return res;

    Instance rounded = round_no_release(a, params);
    LedgerRow r0;
    r0.stage = "round";
    r0.instance = hash;
    res.ledger.push_back(r0);

    bool found = false;
    for (int64_t zeta : relevant_zetas(rounded, params)) {
        Instance shifted = density_shift(rounded, zeta, params);
        std::vector<OrderedSchedule> parts;
        double band_sum = 0;
        for (const auto& band : split_into_bands(shifted, zeta, params)) {
            Instance sub = sub_instance(shifted, band.jobs);
            BandResult br = solve_bounded_ratio(sub, nrp);
            OrderedSchedule mapped;
            mapped.machines.assign(a.m(), {});
            for (int i = 0; i < a.m(); ++i)
                for (int local : br.schedule.machines[i]) mapped.machines[i].push_back(band.jobs[local]);
            parts.push_back(std::move(mapped));
            band_sum += br.cost;
            LedgerRow row;
            row.stage = "band";
            row.instance = hash;
            row.zeta = zeta;
            row.guess = std::to_string(br.guess_job >= 0 ? sub.jobs[br.guess_job].id : -1) + ":" +
                        std::to_string(br.guess_b);
            row.z_star = br.z_star;
            row.schedule_cost = br.cost;
            res.ledger.push_back(row);
        }
        OrderedSchedule combined = combine_band_solutions(shifted, parts);
        LedgerRow crow;
        crow.stage = "combine";
        crow.instance = hash;
        crow.zeta = zeta;
        crow.z_star = band_sum;
        crow.schedule_cost = cost(shifted, combined).total;
        res.ledger.push_back(crow);

        OrderedSchedule final_s = naturalize(a, combined);
        const double c = cost(a, final_s).total;
        if (!found || c < res.cost - kCostTol * std::max(1.0, res.cost)) {
            found = true;
            res.schedule = final_s;
            res.cost = c;
            res.zeta = zeta;
            res.band_sum = band_sum;
        }
    }
    LedgerRow fin;
    fin.stage = "final";
    fin.instance = hash;
    fin.zeta = res.zeta;
    fin.z_star = res.band_sum;
    fin.schedule_cost = res.cost;
    res.ledger.push_back(fin);
    return res;
}

}  // namespace wct
