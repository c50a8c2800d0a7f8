#include "wct/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "wct/rounding.hpp"

namespace wct {

namespace {

double require_delta(const Instance& inst) {
    if (!inst.rounded()) throw DomainError("interval calculus needs a rounded instance");
    return inst.rounded_delta;
}

double proc(const Instance& inst, int j, int machine) { return inst.jobs[j].size / inst.machines[machine].speed; }

ListCheck fail(int condition, int machine, int64_t interval, int job, std::string msg) {
    ListCheck c;
    c.ok = false;
    c.condition = condition;
    c.machine = machine;
    c.interval = interval;
    c.job = job;
    c.message = "condition " + std::to_string(condition) + " violated on machine " + std::to_string(machine) +
                " in interval " + std::to_string(interval) + ": " + msg;
    return c;
}

}  // namespace

int64_t min_release_exp(const Instance& inst) {
    require_delta(inst);
    if (inst.jobs.empty()) return 0;
    int64_t t = std::numeric_limits<int64_t>::max();
    for (const auto& j : inst.jobs) t = std::min(t, j.release_e.exponent);
    return t;
}

IntervalKey interval_key(const Instance& inst, int machine, int64_t i) {
    double delta = require_delta(inst);
    Geo geo(delta);
    IntervalKey k;
    k.i = i;
    k.machine = machine;
    k.length = delta * geo.value(inst.machines[machine].speed_e.exponent + i);
    k.theta = min_release_exp(inst);
    return k;
}

TimedSchedule time_augment(const TimedSchedule& s, double upsilon) {
    if (!(upsilon > 1) || !std::isfinite(upsilon)) throw DomainError("augmentation factor must exceed 1");
    TimedSchedule out = s;
    for (auto& sl : out.slots) sl.completion *= upsilon;
    return out;
}

Instance stretched_instance(const Instance& inst) {
    double delta = require_delta(inst);
    Geo geo(delta);
    Instance out = inst;
    for (auto& j : out.jobs) {
        j.size_e.exponent += 1;
        j.size = geo.value(j.size_e);
    }
    return out;
}

TimedSchedule shift_schedule(const Instance& inst, const TimedSchedule& s) {
    double delta = require_delta(inst);
    TimedSchedule out = s;
    for (auto& sl : out.slots) sl.completion *= 1.0 + delta;
    return out;
}

std::map<std::pair<int, int64_t>, IntervalList::Cell> IntervalList::cells() const {
    std::map<std::pair<int, int64_t>, Cell> out;
    for (int j = 0; j < static_cast<int>(jobs.size()); ++j) {
        out[{jobs[j].start_machine, jobs[j].start_i}].starting.push_back(j);
        out[{jobs[j].end_machine, jobs[j].end_i}].completing.push_back(j);
    }
    return out;
}

IntervalList IntervalList::shifted(int64_t by) const {
    IntervalList out = *this;
    for (auto& lj : out.jobs) {
        lj.start_i += by;
        lj.end_i += by;
    }
    return out;
}

IntervalList list_from_schedule(const Instance& inst, const TimedSchedule& s) {
    Geo geo(require_delta(inst));
    validate(inst, s);
    IntervalList out;
    out.jobs.resize(inst.n());
    for (int j = 0; j < inst.n(); ++j) {
        double st = start_time(inst, s, j);
        if (!(st > 0)) throw DomainError("job " + std::to_string(inst.jobs[j].id) + " starts at time 0");
        ListedJob& lj = out.jobs[j];
        lj.start_machine = lj.end_machine = s.slots[j].machine;
        lj.start_i = geo.interval_index(st);
        lj.end_i = geo.interval_index(s.slots[j].completion);
    }
    return out;
}

ListCheck check_list(const Instance& inst, const IntervalList& list) {
    Geo geo(require_delta(inst));
    if (static_cast<int>(list.jobs.size()) != inst.n())
        return fail(1, -1, 0, -1, "list has " + std::to_string(list.jobs.size()) + " jobs");

    for (int j = 0; j < inst.n(); ++j) {
        const ListedJob& lj = list.jobs[j];
        if (lj.start_machine < 0 || lj.start_machine >= inst.m() || lj.end_machine != lj.start_machine)
            return fail(1, lj.start_machine, lj.start_i, j, "job starts and completes on different machines");
        if (lj.end_i < lj.start_i) return fail(1, lj.start_machine, lj.start_i, j, "job completes before it starts");
        if (inst.jobs[j].release > geo.value(lj.start_i) * (1.0 + kSnap))
            return fail(1, lj.start_machine, lj.start_i, j, "job starts before its release date");
    }

    std::vector<std::vector<int>> per(inst.m());
    for (int j = 0; j < inst.n(); ++j) per[list.jobs[j].start_machine].push_back(j);

    // Capacity of every run of consecutive windows.
    for (int l = 0; l < inst.m(); ++l) {
        std::set<int64_t> starts, ends;
        for (int j : per[l]) {
            starts.insert(list.jobs[j].start_i);
            ends.insert(list.jobs[j].end_i);
        }
        for (int64_t a : starts)
            for (int64_t b : ends) {
                if (b < a) continue;
                double total = 0;
                int last = -1;
                for (int j : per[l])
                    if (list.jobs[j].start_i >= a && list.jobs[j].end_i <= b) {
                        total += inst.jobs[j].size;
                        last = j;
                    }
                double cap = inst.machines[l].speed * (geo.value(b + 1) - geo.value(a));
                if (total > cap * (1.0 - 5e-13))
                    return fail(2, l, a, last,
                                "jobs inside windows " + std::to_string(a) + ".." + std::to_string(b) +
                                    " need more than the available time");
            }
    }

    for (int l = 0; l < inst.m(); ++l)
        for (int j : per[l]) {
            const ListedJob& lj = list.jobs[j];
            if (lj.end_i - lj.start_i < 2) continue;
            for (int k : per[l]) {
                if (k == j) continue;
                const ListedJob& o = list.jobs[k];
                for (int64_t e : {o.start_i, o.end_i})
                    if (e > lj.start_i && e < lj.end_i)
                        return fail(3, l, e, k, "event inside the run of job " + std::to_string(inst.jobs[j].id));
            }
        }

    std::map<std::pair<int, int64_t>, std::pair<int, int>> crossing;
    for (int j = 0; j < inst.n(); ++j) {
        const ListedJob& lj = list.jobs[j];
        if (lj.end_i == lj.start_i) continue;
        if (++crossing[{lj.start_machine, lj.start_i}].first > 1)
            return fail(4, lj.start_machine, lj.start_i, j, "two jobs start here and complete later");
        if (++crossing[{lj.end_machine, lj.end_i}].second > 1)
            return fail(4, lj.end_machine, lj.end_i, j, "two jobs complete here after starting earlier");
    }
    return {};
}

TimedSchedule schedule_from_list(const Instance& inst, const IntervalList& list, double timely_delta) {
    Geo geo(require_delta(inst));
    ListCheck c = check_list(inst, list);
    if (!c.ok) throw ListViolation(c);

    TimedSchedule out;
    out.slots.assign(inst.n(), Slot{});
    for (int l = 0; l < inst.m(); ++l) {
        std::map<int64_t, std::vector<int>> inner;
        std::map<int64_t, int> cross;
        for (int j = 0; j < inst.n(); ++j) {
            const ListedJob& lj = list.jobs[j];
            if (lj.start_machine != l) continue;
            if (lj.end_i == lj.start_i)
                inner[lj.start_i].push_back(j);
            else
                cross[lj.start_i] = j;
        }
        std::set<int64_t> windows;
        for (auto& [i, v] : inner) windows.insert(i);
        for (auto& [i, j] : cross) windows.insert(i);

        double last = 0;
        for (int64_t i : windows) {
            double t = std::max(geo.value(i), last);
            auto it = inner.find(i);
            if (it != inner.end())
                for (int j : natural_order(inst.jobs, it->second)) {
                    t += proc(inst, j, l);
                    out.slots[j] = Slot{l, t};
                }
            auto ct = cross.find(i);
            if (ct != cross.end()) {
                int j = ct->second;
                double p = proc(inst, j, l);
                double done = std::max(geo.value(list.jobs[j].end_i), t + p);
                if (timely_delta > 0) done = std::max(done, (1.0 + timely_delta) * p);
                out.slots[j] = Slot{l, done};
                t = done;
            }
            last = t;
        }
    }

    for (int j = 0; j < inst.n(); ++j)
        if (geo.interval_index(out.slots[j].completion) != list.jobs[j].end_i)
            throw ListViolation(fail(2, out.slots[j].machine, list.jobs[j].end_i, j,
                                     "job " + std::to_string(inst.jobs[j].id) + " cannot complete in its window"));
    return out;
}

TimedSchedule StretchedSchedule::actual() const {
    TimedSchedule t;
    t.slots.reserve(jobs.size());
    for (const auto& j : jobs) t.slots.push_back(Slot{j.machine, j.actual_end});
    return t;
}

std::vector<std::pair<int, int64_t>> StretchedSchedule::short_gaps() const {
    std::vector<std::pair<int, int64_t>> out;
    for (const auto& [key, g] : gaps)
        if (!g.covered && g.idle < g.required * (1.0 - 1e-9)) out.push_back(key);
    return out;
}

StretchedSchedule time_stretch(const Instance& inst, const TimedSchedule& s, double delta) {
    validate(inst, s);
    TimelyCheck tc = is_timely(inst, s, delta);
    if (!tc.timely) throw DomainError("time stretching needs a timely schedule (job " +
                                      std::to_string(inst.jobs[tc.job].id) + ")");
    Geo geo(delta);
    const double small_factor = std::pow(delta, 11);

    StretchedSchedule out;
    out.jobs.resize(inst.n());
    for (int j = 0; j < inst.n(); ++j) {
        int l = s.slots[j].machine;
        double p = proc(inst, j, l);
        double t1 = s.slots[j].completion;
        double t0 = t1 - p;
        StretchedJob& sj = out.jobs[j];
        sj.machine = l;
        sj.reserved_start = (1.0 + delta) * t0;
        sj.reserved_end = (1.0 + delta) * t1;
        sj.basic_start = sj.reserved_start + delta * p / 2.0;
        sj.basic_end = sj.reserved_end - delta * p / 2.0;
        sj.actual_start = sj.basic_start;
        sj.actual_end = sj.basic_end;
    }

    for (int l = 0; l < inst.m(); ++l) {
        const double speed = inst.machines[l].speed;
        std::vector<int> v;
        for (int j = 0; j < inst.n(); ++j)
            if (s.slots[j].machine == l) v.push_back(j);
        std::sort(v.begin(), v.end(),
                  [&](int a, int b) { return out.jobs[a].reserved_start < out.jobs[b].reserved_start; });

        std::map<int64_t, std::vector<int>> by_start;
        for (int j : v) by_start[geo.interval_index(out.jobs[j].reserved_start)].push_back(j);

        double prev_end = 0;
        for (auto& [i, group] : by_start) {
            const double lo = geo.value(i), hi = geo.value(i + 1);
            const double small_bound = small_factor * speed * lo;
            std::vector<int> packed;
            int keep = -1;
            for (int j : group) {
                bool crosses = geo.interval_index(out.jobs[j].reserved_end) > i;
                if (!crosses || inst.jobs[j].size < small_bound)
                    packed.push_back(j);
                else
                    keep = j;
            }
            double t = std::max(lo, prev_end);
            for (int j : packed) {
                StretchedJob& sj = out.jobs[j];
                sj.actual_start = t;
                t += inst.jobs[j].size / speed;
                sj.actual_end = t;
                if (inst.jobs[j].size < small_bound && geo.interval_index(t) != i) ++out.small_violations;
            }
            double limit = keep >= 0 ? out.jobs[keep].basic_start : hi;
            if (!packed.empty() && (t > limit * (1.0 + 1e-12) || (keep < 0 && geo.interval_index(t) > i)))
                ++out.overflows;
            prev_end = keep >= 0 ? out.jobs[keep].actual_end : t;
        }

        if (v.empty()) continue;
        int64_t first = std::numeric_limits<int64_t>::max(), last = std::numeric_limits<int64_t>::min();
        for (int j : v) {
            first = std::min(first, geo.interval_index(out.jobs[j].reserved_start));
            last = std::max(last, geo.interval_index(out.jobs[j].reserved_end));
        }
        for (int64_t i = first - 1; i <= last + 1; ++i) {
            const double lo = geo.value(i), hi = geo.value(i + 1);
            GapRecord g;
            g.required = std::pow(delta, 3) * speed * delta * lo;
            std::vector<std::pair<double, double>> busy;
            for (int j : v) {
                const StretchedJob& sj = out.jobs[j];
                if (geo.interval_index(sj.reserved_start) < i && geo.interval_index(sj.reserved_end) > i)
                    g.covered = true;
                double a = std::max(lo, sj.actual_start), b = std::min(hi, sj.actual_end);
                if (b > a) busy.push_back({a, b});
            }
            std::sort(busy.begin(), busy.end());
            double idle = 0, cur = lo;
            g.first_idle = -1;
            for (auto [a, b] : busy) {
                if (a > cur) {
                    if (g.first_idle < 0) g.first_idle = cur;
                    idle += a - cur;
                }
                cur = std::max(cur, b);
            }
            if (hi > cur) {
                if (g.first_idle < 0) g.first_idle = cur;
                idle += hi - cur;
            }
            g.idle = idle * speed;
            out.gaps[{l, i}] = g;
        }
    }

    out.input_pseudo_cost = pseudo_cost(inst, s, geo).total;
    out.output_pseudo_cost = pseudo_cost(inst, out.actual(), geo).total;
    return out;
}

std::optional<int64_t> gap_witness(const StretchedSchedule& st, int machine, int64_t i, double delta) {
    Geo geo(delta);
    const double top = geo.value(i) / (delta * delta);
    for (int64_t k = i + 1; geo.value(k + 1) <= top * (1.0 + kSnap); ++k) {
        auto it = st.gaps.find({machine, k});
        if (it == st.gaps.end()) return k;  // no job anywhere near: idle window
        const GapRecord& g = it->second;
        if (!g.covered && g.idle >= g.required * (1.0 - 1e-9)) return k;
    }
    return std::nullopt;
}

std::string to_string(JobClass c) {
    switch (c) {
        case JobClass::small: return "small";
        case JobClass::medium: return "medium";
        case JobClass::large: return "large";
        case JobClass::huge: return "huge";
    }
    return "?";
}

JobClass classify_job(double size, const IntervalKey& key, double delta) {
    // key.length = s (1+d)^i d
    const double unit = key.length / delta;
    auto below = [&](double bound) { return size < bound * (1.0 - kSnap); };
    if (below(std::pow(delta, 11) * unit)) return JobClass::small;
    if (below(unit)) return JobClass::medium;
    if (below(unit * (1.0 + delta) / delta)) return JobClass::large;
    return JobClass::huge;
}

OrganizedCheck is_organized(const Instance& pseudo, const TimedSchedule& s) {
    const double delta = require_delta(pseudo);
    Geo geo(delta);
    validate(pseudo, s);
    OrganizedCheck out;
    TimelyCheck tc = is_timely(pseudo, s, delta);
    if (!tc.timely) {
        out.organized = false;
        out.condition = "timely";
        out.j1 = tc.job;
        return out;
    }
    const int n = pseudo.n();
    std::vector<int64_t> si(n), division(n);
    std::vector<int> ml(n);
    for (int j = 0; j < n; ++j) {
        si[j] = geo.interval_index(start_time(pseudo, s, j));
        ml[j] = s.slots[j].machine;
        division[j] = divisions(pseudo.jobs[j].size_e.exponent, delta).division;
    }
    auto small_for = [&](int j, int64_t i, int l) {
        return classify_job(pseudo.jobs[j].size, interval_key(pseudo, l, i), delta) == JobClass::small;
    };
    for (int j = 0; j < n; ++j)
        if (small_for(j, si[j], ml[j]) && geo.interval_index(s.slots[j].completion) != si[j]) {
            out.organized = false;
            out.condition = "1";
            out.j1 = j;
            return out;
        }
    auto same = [](double a, double b) { return std::fabs(a - b) <= kSnap * 8 * std::max(a, b); };
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b || division[a] != division[b]) continue;
            if (pseudo.jobs[a].density_exp() != pseudo.jobs[b].density_exp()) continue;
            bool earlier = si[a] < si[b] || (si[a] == si[b] && ml[a] < ml[b]);
            if (!earlier) continue;
            const Job& ja = pseudo.jobs[a];
            const Job& jb = pseudo.jobs[b];
            if (jb.release > geo.value(si[a]) * (1.0 + kSnap)) continue;
            std::string bad;
            if (!same(ja.size, jb.size)) {
                if (ja.size < jb.size && small_for(b, si[a], ml[a])) bad = "2a";
            } else if (!same(ja.release, jb.release)) {
                if (jb.release < ja.release) bad = "2b";
            } else if (b > a) {
                bad = "2c";
            }
            if (!bad.empty()) {
                out.organized = false;
                out.condition = bad;
                out.j1 = a;
                out.j2 = b;
                return out;
            }
        }
    return out;
}

TimedSchedule organize_equal_jobs(const Instance& pseudo, const TimedSchedule& s) {
    Geo geo(require_delta(pseudo));
    std::map<std::pair<int64_t, int64_t>, std::vector<int>> groups;
    for (int j = 0; j < pseudo.n(); ++j)
        groups[{pseudo.jobs[j].size_e.exponent, pseudo.jobs[j].weight_e.exponent}].push_back(j);
    TimedSchedule out = s;
    for (auto& [key, v] : groups) {
        std::vector<Slot> slots;
        for (int j : v) slots.push_back(s.slots[j]);
        auto win = [&](const Slot& sl, int j) { return geo.interval_index(sl.completion - proc(pseudo, j, sl.machine)); };
        std::vector<int> order(v.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) {
            int64_t wx = win(slots[x], v[x]), wy = win(slots[y], v[y]);
            if (wx != wy) return wx < wy;
            if (slots[x].machine != slots[y].machine) return slots[x].machine < slots[y].machine;
            return slots[x].completion < slots[y].completion;
        });
        std::vector<int> jobs = v;
        std::sort(jobs.begin(), jobs.end(), [&](int x, int y) {
            if (pseudo.jobs[x].release != pseudo.jobs[y].release) return pseudo.jobs[x].release < pseudo.jobs[y].release;
            return x > y;
        });
        for (size_t k = 0; k < jobs.size(); ++k) out.slots[jobs[k]] = slots[order[k]];
    }
    return out;
}

JobShiftResult job_shift(const Instance& inst) {
    const double delta = require_delta(inst);
    if (!inst.has_release) throw DomainError("job shifting needs release dates");
    Geo geo(delta);
    const int n = inst.n();
    const double medium_extra = std::pow(1.0 / delta, 10);
    const double bound_factor = std::pow(delta, -23);

    JobShiftResult out;
    out.shifted = inst;
    out.selected_machine.assign(n, -1);
    std::vector<int64_t> cur(n);
    for (int j = 0; j < n; ++j) cur[j] = inst.jobs[j].release_e.exponent;

    // Priority: earlier original release first, then larger index.
    auto prio = [&](int a, int b) {
        if (inst.jobs[a].release_e != inst.jobs[b].release_e) return inst.jobs[a].release_e < inst.jobs[b].release_e;
        return a > b;
    };

    std::map<int64_t, std::vector<int>> by_density;
    for (int j = 0; j < n; ++j) by_density[inst.jobs[j].density_exp()].push_back(j);

    for (auto& [d, jobs] : by_density) {
        std::sort(jobs.begin(), jobs.end(), prio);
        std::vector<char> done(n, 0);
        size_t remaining = jobs.size();
        int64_t i = std::numeric_limits<int64_t>::max();
        for (int j : jobs) i = std::min(i, cur[j]);
        for (; remaining > 0; ++i) {
            std::vector<int> cand;  // in priority order
            for (int j : jobs)
                if (!done[j] && cur[j] == i) cand.push_back(j);
            if (cand.empty()) continue;
            for (int l = 0; l < inst.m(); ++l) {
                IntervalKey key = interval_key(inst, l, i);
                SelectionRecord rec{d, i, l, 0, 0, key.length * bound_factor};
                auto take = [&](int j) {
                    done[j] = 1;
                    out.selected_machine[j] = l;
                    ++rec.jobs;
                    rec.total += inst.jobs[j].size;
                    --remaining;
                };
                std::map<int64_t, std::vector<int>> by_size;  // size exponent -> open candidates
                for (int j : cand)
                    if (!done[j]) by_size[inst.jobs[j].size_e.exponent].push_back(j);
                std::map<int64_t, std::vector<int64_t>> small_sizes;  // division -> size exponents
                for (auto& [e, v] : by_size) {
                    JobClass c = classify_job(inst.jobs[v.front()].size, key, delta);
                    if (is_big(c)) {
                        size_t quota = 1;
                        if (c == JobClass::medium)
                            quota += static_cast<size_t>(std::min<double>(medium_extra, v.size()));
                        for (size_t k = 0; k < v.size() && k < quota; ++k) take(v[k]);
                    } else if (c == JobClass::small) {
                        small_sizes[divisions(e, delta).division].push_back(e);
                    }
                }
                for (auto& [k, sizes] : small_sizes) {
                    double total = 0;
                    for (auto e = sizes.rbegin(); e != sizes.rend() && total < key.length; ++e)
                        for (int j : by_size[*e]) {
                            if (total >= key.length) break;
                            take(j);
                            total += inst.jobs[j].size;
                        }
                }
                if (rec.jobs > 0) {
                    if (rec.total > rec.bound) out.within_bound = false;
                    out.ledger.push_back(rec);
                }
            }
            for (int j : cand)
                if (!done[j]) cur[j] = i + 1;
        }
    }

    for (int j = 0; j < n; ++j)
        if (cur[j] != inst.jobs[j].release_e.exponent) {
            out.shifted.jobs[j].release_e = {cur[j]};
            out.shifted.jobs[j].release = geo.value(cur[j]);
        }
    return out;
}

PackResult pack_release_batch(const Instance& shifted, const std::vector<int>& selected_machine,
                              const std::vector<int>& jobs, double r, double t, double y_hat, bool first_form) {
    const double delta = require_delta(shifted);
    if (t < r * (1.0 - kSnap)) throw DomainError("batch must start no earlier than its release date");
    PackResult out;
    out.fragment.slots.assign(shifted.n(), Slot{});
    out.finish = t;
    out.bound = first_form ? t + r * y_hat / std::pow(delta, 22) : t + r * y_hat * (1.0 + delta) / std::pow(delta, 23);
    std::vector<double> at(shifted.m(), t);
    for (int j : jobs) {
        double rel = shifted.jobs[j].release;
        if (first_form ? std::fabs(rel - r) > kSnap * 8 * r : rel > r * (1.0 + kSnap))
            throw DomainError("job " + std::to_string(shifted.jobs[j].id) + " has release " + std::to_string(rel) +
                              (first_form ? ", batch needs exactly " : ", batch allows at most ") + std::to_string(r));
        int l = selected_machine.at(j);
        if (l < 0 || l >= shifted.m())
            throw DomainError("job " + std::to_string(shifted.jobs[j].id) + " was never selected");
        at[l] += proc(shifted, j, l);
        out.fragment.slots[j] = Slot{l, at[l]};
        out.finish = std::max(out.finish, at[l]);
    }
    out.ok = out.finish <= out.bound * (1.0 + 1e-12);
    return out;
}

}  // namespace wct
