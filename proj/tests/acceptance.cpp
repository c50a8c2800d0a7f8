// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "support.hpp"
#include "wct/bands_eptas.hpp"
#include "wct/io.hpp"
#include "wct/oracle.hpp"
#include "wct/release_eptas.hpp"
#include "wct/rounding.hpp"
#include "wct/timeline.hpp"

using namespace wct;
using namespace testing_support;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

// Counts violations and keeps the first description.
struct Tally {
    long checks = 0, bad = 0;
    std::string first;
    void expect(bool cond, const std::string& what) {
        ++checks;
        if (!cond) {
            if (bad == 0) first = what;
            ++bad;
        }
    }
    Outcome outcome(const std::string& extra = "") const {
        std::ostringstream os;
        os << checks << " checks, " << bad << " violations";
        if (!extra.empty()) os << ", " << extra;
        if (bad) os << "; first: " << first;
        return {bad == 0, os.str()};
    }
};

std::string num(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

OracleLimits pseudo_limits(double delta) {
    OracleLimits lim = release_limits();
    lim.objective = Objective::pseudo_cost;
    lim.timely = true;
    lim.delta = delta;
    return lim;
}

OrderedSchedule random_ordered(Rng& r, const Instance& inst) {
    OrderedSchedule s;
    s.machines.assign(inst.m(), {});
    std::vector<int> order(inst.n());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), r.eng);
    for (int j : order) s.machines[r.pick(0, inst.m() - 1)].push_back(j);
    return s;
}

Outcome smith() {
    Tally t;
    Rng r(1001);
    double worst = 0;
    for (int it = 0; it < 200; ++it) {
        int n = r.pick(1, 7);
        std::vector<Job> jobs;
        for (int j = 0; j < n; ++j) jobs.push_back({j, r.uni(0.1, 5), r.uni(0.1, 5), 0, {}, {}, {}});
        double sp = r.uni(0.5, 2);
        double a = smith_single_machine(jobs, sp).value, b = brute_single(jobs, sp);
        double rel = std::fabs(a - b) / b;
        worst = std::max(worst, rel);
        t.expect(rel <= 1e-9, "instance " + std::to_string(it));
    }
    return t.outcome("max relative gap " + num(worst));
}

Outcome sandwich() {
    Tally t;
    Rng r(1002);
    for (int inv : {8, 16}) {
        ParamPack p = make_params_for_delta(1.0 / inv, Profile::practical, false);
        const double top = std::pow(1 + p.delta, 3);
        for (int it = 0; it < 100; ++it) {
            Instance a = random_instance(r, r.pick(1, 8), r.pick(1, 3));
            Instance b = round_no_release(a, p);
            for (int k = 0; k < 5; ++k) {
                OrderedSchedule s = random_ordered(r, a);
                double ca = cost(a, s).total, cb = cost(b, s).total;
                t.expect(ca <= cb * (1 + 1e-12), "lower side, 1/d=" + std::to_string(inv));
                t.expect(cb <= top * ca * (1 + 1e-12), "upper side, 1/d=" + std::to_string(inv));
            }
        }
    }
    return t.outcome();
}

Outcome gamma_machinery() {
    Tally t;
    Rng r(1003);
    for (int it = 0; it < 200; ++it) {
        int n = r.pick(1, 6);
        std::vector<Job> jobs;
        for (int j = 0; j < n; ++j) jobs.push_back({j, r.uni(0.1, 5), r.uni(0.1, 5), 0, {}, {}, {}});
        double sp = r.uni(0.5, 2), lb = gamma_lower_bound(jobs, sp);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        do {
            std::vector<Job> seq;
            for (int j : order) seq.push_back(jobs[j]);
            t.expect(lb <= gamma_sum(seq, sp) * (1 + 1e-12), "lower bound above a placement");
        } while (std::next_permutation(order.begin(), order.end()));
    }
    for (int it = 0; it < 10000; ++it) {
        double dens = r.uni(0.1, 4), sp = r.uni(0.5, 3), start = r.uni(0, 10);
        int n = r.pick(1, 6);
        double clock = start, g = 0, total = 0;
        for (int j = 0; j < n; ++j) {
            double p = r.uni(0.1, 3);
            clock += p / sp;
            g += dens * p * (clock - p / (2 * sp));
            total += p;
        }
        double b = block_gamma(total, dens, start, sp);
        t.expect(std::fabs(b - g) <= 1e-9 * std::max(1.0, g), "block " + std::to_string(it));
    }
    return t.outcome();
}

Outcome density_shifting() {
    Tally t;
    Rng r(1004);
    ParamPack p = make_params(0.5, Profile::practical, false);
    double worst = 0;
    for (int it = 0; it < 100; ++it) {
        Instance a = round_no_release(random_instance(r, r.pick(1, 6), r.pick(1, 2)), p);
        double base = opt_no_release(a).value, best = kInf;
        for (int64_t z : relevant_zetas(a, p)) {
            double v = opt_no_release(density_shift(a, z, p)).value;
            t.expect(base <= v * (1 + 1e-12), "shift below the rounded optimum");
            best = std::min(best, v);
        }
        worst = std::max(worst, best / base);
        t.expect(best <= (1 + 2 * p.delta) * base * (1 + 1e-12), "instance " + std::to_string(it));
    }
    return t.outcome("worst min ratio " + num(worst));
}

Outcome milp_bound() {
    Tally t;
    ParamPack p = make_params(0.5, Profile::practical, false);
    NRParams nr = NRParams::from(p);
    int bands = 0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        GenSpec g;
        g.seed = 500 + seed;
        g.n = 2 + static_cast<int>(seed % 5);
        g.m = 1 + static_cast<int>(seed % 2);
        g.shape = seed % 2 ? Shape::uniform : Shape::bimodal_density;
        Instance r = round_no_release(generate(g), p);
        for (int64_t z : relevant_zetas(r, p)) {
            Instance s = density_shift(r, z, p);
            for (const Band& b : split_into_bands(s, z, p)) {
                Instance band = sub_instance(s, b.jobs);
                BandResult br = solve_bounded_ratio(band, nr);
                ++bands;
                t.expect(br.z_star <= opt_no_release(band).value + 1e-7, "seed " + std::to_string(seed));
            }
        }
    }
    return t.outcome(std::to_string(bands) + " bands");
}

Outcome no_release_suite() {
    Tally t;
    ParamPack p = make_params(0.5, Profile::practical, false);
    double worst = 0;
    for (uint64_t seed = 1; seed <= 24; ++seed) {
        GenSpec g;
        g.seed = seed;
        g.n = 2 + static_cast<int>(seed % 5);
        g.m = 1 + static_cast<int>(seed % 2);
        g.shape = seed % 2 ? Shape::uniform : Shape::bimodal_density;
        Instance a = generate(g);
        NoReleaseResult res = eptas_no_release(a, p);
        try {
            validate(a, res.schedule);
        } catch (const ValidationError& e) {
            t.expect(false, e.what());
        }
        double opt = opt_no_release(a).value;
        worst = std::max(worst, res.cost / opt);
        t.expect(res.cost <= (1 + p.eps) * opt * (1 + 1e-9), "seed " + std::to_string(seed));
        for (const auto& row : res.ledger) {
            if (row.stage == "band" || row.stage == "combine")
                t.expect(row.schedule_cost - row.z_star >= -1e-9 * std::max(1.0, row.z_star),
                         row.stage + " below its bound, seed " + std::to_string(seed));
            if (row.stage == "final")
                t.expect((1 + p.eps) * opt - row.schedule_cost >= -1e-9 * opt, "final slack, seed " + std::to_string(seed));
        }
    }
    return t.outcome("worst ratio " + num(worst));
}

Outcome interval_lists() {
    Tally t;
    Rng r(1007);
    ParamPack p = make_params(0.5, Profile::practical, true);
    Geo g(p.delta);
    for (int it = 0; it < 500; ++it) {
        Instance a = round_release(random_instance(r, r.pick(1, 7), r.pick(1, 3), true), p);
        TimedSchedule s = random_timely_schedule(r, a, p.delta);
        IntervalList list = list_from_schedule(a, s);
        ListCheck c = check_list(a, list);
        t.expect(c.ok, "valid schedule rejected: " + c.message);
        if (!c.ok) continue;
        TimedSchedule back = schedule_from_list(a, list);
        t.expect(pseudo_cost(a, back, g).total == pseudo_cost(a, s, g).total, "round trip changed the pseudo-cost");
    }
    for (int it = 0; it < 50; ++it) {
        int cond = 1 + it % 4;
        ListFixture f = list_violation(r, cond, p.delta);
        ListCheck c = check_list(f.inst, f.list);
        t.expect(!c.ok && c.condition == cond,
                 "violation of condition " + std::to_string(cond) + " reported as " + std::to_string(c.condition));
    }
    return t.outcome();
}

Outcome time_stretching() {
    Tally t;
    Rng r(1008);
    ParamPack p = make_params(0.5, Profile::practical, true);
    const double d = p.delta;
    Geo g(d);
    long witnesses = 0;
    for (int it = 0; it < 200; ++it) {
        Instance a = round_release(random_instance(r, r.pick(1, 7), r.pick(1, 3), true), p);
        TimedSchedule s = random_timely_schedule(r, a, d, r.coin() ? 0.0 : 3.0);
        StretchedSchedule st = time_stretch(a, s, d);
        t.expect(st.short_gaps().empty(), "window without a gap of d^3 Z");
        t.expect(st.output_pseudo_cost <= (1 + d) * st.input_pseudo_cost * (1 + 1e-12), "pseudo-cost inflation");
        t.expect(st.overflows == 0 && st.small_violations == 0, "packing overflow");
        TimedSchedule act = st.actual();
        auto occ_idle = [&](int l, int64_t k) {
            double lo = g.value(k), hi = g.value(k + 1), busy = 0;
            for (int j = 0; j < a.n(); ++j) {
                if (act.slots[j].machine != l) continue;
                double e = act.slots[j].completion, b = e - a.jobs[j].size / a.machines[l].speed;
                busy += std::max(0.0, std::min(e, hi) - std::max(b, lo));
            }
            return (hi - lo - busy) * a.machines[l].speed;
        };
        for (const auto& [key, gap] : st.gaps) {
            auto w = gap_witness(st, key.first, key.second, d);
            t.expect(w.has_value(), "no gap found after a window");
            if (!w) continue;
            ++witnesses;
            t.expect(*w > key.second && g.value(*w + 1) <= g.value(key.second) / (d * d) * (1 + 1e-12),
                     "gap outside the backward range");
            const double need = std::pow(d, 3) * a.machines[key.first].speed * d * g.value(*w);
            t.expect(occ_idle(key.first, *w) >= need * (1 - 1e-9), "witness window is not idle enough");
        }
    }
    return t.outcome(std::to_string(witnesses) + " gap witnesses");
}

Outcome division_checks() {
    Tally t;
    for (int inv : {8, 36}) {
        const double d = 1.0 / inv;
        Geo g(d);
        std::map<int64_t, std::vector<double>> by_division;
        for (int64_t i = -30; i <= 30; ++i) {
            DivisionInfo x = divisions(i, d);
            t.expect(x.pseudo_size >= g.value(i) * (1 - 1e-12) && x.pseudo_size < g.value(i) * (1 + d),
                     "pseudo-size bracket at " + std::to_string(i));
            by_division[x.division].push_back(x.pseudo_size);
        }
        for (const auto& [k, v] : by_division)
            for (double a : v)
                for (double b : v) {
                    double e = std::log2(std::max(a, b) / std::min(a, b));
                    t.expect(std::fabs(e - std::round(e)) < 1e-9, "division " + std::to_string(k) + " not a chain");
                }
        DivisionInfo w = divisions(1, d);
        t.expect(w.division == 1 && w.subdivision == 0, "worked case");
    }
    return t.outcome();
}

Outcome job_shifting() {
    Tally t;
    Rng r(1010);
    ParamPack p = make_params(0.5, Profile::practical, true);
    const double d = p.delta;
    Geo g(d);
    long audits = 0;
    for (int it = 0; it < 100; ++it) {
        Instance a = round_release(random_instance(r, r.pick(1, 30), r.pick(1, 3), true), p);
        JobShiftResult res = job_shift(a);
        for (const auto& rec : res.ledger) {
            ++audits;
            t.expect(rec.total <= rec.bound, "selected size above Z/d^23");
        }
        JobShiftResult again = job_shift(res.shifted);
        for (int j = 0; j < a.n(); ++j)
            t.expect(again.shifted.jobs[j].release_e == res.shifted.jobs[j].release_e, "not idempotent");
    }
    std::vector<ExpJob> many(10000, ExpJob{0, 0, 0});
    JobShiftResult big = job_shift(exp_instance(d, {-20}, many));
    for (const auto& rec : big.ledger) {
        ++audits;
        t.expect(rec.total <= rec.bound, "selected size above Z/d^23 on the unit-job fixture");
    }
    int organized = 0;
    for (int it = 0; it < 40; ++it) {
        Instance pseudo = to_pseudo_instance(round_release(random_instance(r, r.pick(2, 5), r.pick(1, 2), true), p));
        TimedSchedule s = organize_equal_jobs(pseudo, opt_release(pseudo, pseudo_limits(d)).schedule);
        if (!is_organized(pseudo, s).organized) continue;
        ++organized;
        Instance tilde = job_shift(pseudo).shifted;
        for (int j = 0; j < pseudo.n(); ++j)
            t.expect(g.interval_index(start_time(pseudo, s, j)) >= tilde.jobs[j].release_e.exponent,
                     "organized schedule starts before the shifted release");
    }
    t.expect(organized >= 30, "too few organized fixtures");
    return t.outcome(std::to_string(audits) + " selection audits, " + std::to_string(organized) + " organized fixtures");
}

Outcome idle_insertion() {
    Tally t;
    Rng r(1011);
    ParamPack p = make_params(0.5, Profile::practical, true);
    ReleaseParams rp = ReleaseParams::from(p);
    double worst = 0;
    for (int it = 0; it < 20; ++it) {
        Instance tilde = job_shift(round_release(random_instance(r, r.pick(2, 5), r.pick(1, 2), true), p)).shifted;
        IdleInsertionLedger led = idle_insertion_ledger(tilde, opt_release(tilde).schedule, rp);
        t.expect(led.all_feasible, "transformed schedule infeasible for A_k");
        t.expect(led.sum <= led.bound, "sum over k above (a/d + (1+d) a) OPT");
        t.expect(led.best <= (1 + 2 * p.delta) * led.opt * (1 + 1e-12), "min over k above (1+2d) OPT");
        worst = std::max(worst, led.sum / led.bound);
    }
    return t.outcome("largest sum/bound " + num(worst));
}

Outcome combining_audits() {
    Tally t;
    Rng r(1012);
    const double d = 0.125;
    size_t charges = 0, gaps = 0;
    for (int it = 0; it < 40; ++it) {
        BandFixture f = band_fixture(r, d, r.pick(1, 3));
        CombineBandsResult cb = combine_density_bands(f.inst, f.bands, d, f.max_release, 1);
        try {
            validate(f.inst, cb.schedule);
        } catch (const ValidationError& e) {
            t.expect(false, e.what());
        }
        for (const auto& x : cb.sparse_loads) t.expect(x.load <= x.bound * (1 + 1e-9), "sparse-gap load");
        for (const auto& x : cb.postpone_loads) t.expect(x.load <= x.bound * (1 + 1e-9), "postpone-gap load");
        for (const auto& x : cb.charges) t.expect(x.size <= x.bound * (1 + 1e-9), "charged size");
        for (double x : cb.machine_ratio) t.expect(x <= (1 + d) * (1 + 1e-9), "machine ratio " + num(x));
        t.expect(cb.placement_failures == 0 && cb.prefix_ok, "placement or prefix");
        t.expect(!cb.charges.empty(), "fixture without a postponement");
        charges += cb.charges.size();
        gaps += cb.sparse_loads.size() + cb.postpone_loads.size();
    }
    return t.outcome(std::to_string(charges) + " charges, " + std::to_string(gaps) + " gap loads");
}

Outcome release_suite() {
    Tally t;
    Rng r(1013);
    ParamPack p = make_params(0.75, Profile::practical, true);
    ReleaseOptions forced;
    forced.force_pipeline = true;
    double worst = 0, worst_forced = 0;
    int refused = 0;
    for (int it = 0; it < 24; ++it) {
        Instance a;
        if (it % 2) {
            GenSpec g;
            g.shape = Shape::release_bursts;
            g.seed = 700 + static_cast<uint64_t>(it);
            g.n = 1 + it % 5;
            g.m = 1 + it % 2;
            a = generate(g);
        } else {
            a = random_instance(r, r.pick(1, 5), r.pick(1, 2), true);
        }
        Instance ap = round_release(a, p);
        const double opt = opt_release(ap, pseudo_limits(p.delta)).value;
        auto audit = [&](const ReleaseResult& res, double& w, const std::string& tag) {
            try {
                validate(a, res.schedule);
                validate(ap, res.schedule);
            } catch (const ValidationError& e) {
                t.expect(false, tag + e.what());
                return;
            }
            t.expect(is_timely(ap, res.schedule, p.delta).timely, tag + "schedule not timely");
            w = std::max(w, res.pseudo_cost / opt);
            t.expect(res.pseudo_cost <= (1 + p.eps) * opt * (1 + 1e-9),
                     tag + "ratio " + num(res.pseudo_cost / opt) + " above 1+eps, instance " + std::to_string(it));
        };
        audit(eptas_release(a, p), worst, "");
        try {
            audit(eptas_release(a, p, forced), worst_forced, "structured pipeline: ");
        } catch (const RefusalError& e) {
            ++refused;
            t.expect(false, std::string("structured pipeline refused: ") + e.what());
        }
    }
    return t.outcome("worst ratio " + num(worst) + " (exact search below 2/d^7+3 machines), structured pipeline " +
                     num(worst_forced) + ", " + std::to_string(refused) + " refusals");
}

Outcome release_bound() {
    Tally t;
    Rng r(1014);
    ParamPack p = make_params(0.5, Profile::practical, true);
    ReleaseParams rp = ReleaseParams::from(p);
    double worst = 0;
    for (int it = 0; it < 10; ++it) {
        Instance a = job_shift(round_release(random_instance(r, r.pick(1, 4), r.pick(1, 2), true), p)).shifted;
        BoundedResult br = solve_bounded_release(a, rp);
        Instance kept = sub_instance(a, br.pre.kept);
        double opt = kept.n() ? opt_release(kept, pseudo_limits(p.delta)).value : 0;
        if (opt > 0) worst = std::max(worst, br.z_star / opt);
        t.expect(br.z_star <= opt + 1e-7, "Z* above the oracle, fixture " + std::to_string(it));
    }
    return t.outcome("largest Z*/oracle " + num(worst));
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all = {
        {1, "smith optimality", 10, smith},
        {2, "rounding sandwich", 5, sandwich},
        {3, "gamma machinery", 10, gamma_machinery},
        {4, "density shifting", 30, density_shifting},
        {5, "band program lower bound", 300, milp_bound},
        {6, "no-release end to end", 600, no_release_suite},
        {7, "interval lists", 10, interval_lists},
        {8, "time stretching", 30, time_stretching},
        {9, "divisions", 1, division_checks},
        {10, "job shifting", 30, job_shifting},
        {11, "release-date shifting", 300, idle_insertion},
        {12, "combining audits", 60, combining_audits},
        {13, "release end to end", 1800, release_suite},
        {14, "release program lower bound", 300, release_bound},
    };
    int failed = 0;
    for (const auto& c : all) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool ok = o.ok && secs <= c.limit_s;
        if (secs > c.limit_s) o.detail += "; over the time limit";
        failed += !ok;
        std::printf("%s %2d %s: %s (%.2f s)\n", ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
