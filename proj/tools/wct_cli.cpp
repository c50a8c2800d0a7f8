#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wct/bands_eptas.hpp"
#include "wct/io.hpp"
#include "wct/oracle.hpp"
#include "wct/release_eptas.hpp"
#include "wct/rounding.hpp"

using namespace wct;

namespace {

struct Common {
    double eps = 0.5;
    std::string profile = "practical";
    uint64_t seed = 1;
    int oracle_max_jobs = 8;
    int oracle_max_machines = 3;
    std::string out;
};

// Writes to --out when given, stdout otherwise.
void emit(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text;
}

std::string schedule_text(const Instance& inst, const TimedSchedule& s) {
    std::ostringstream os;
    write_schedule(os, inst, s);
    return os.str();
}

bool has_release(const Instance& inst) {
    if (inst.has_release) return true;
    for (const auto& j : inst.jobs)
        if (j.release > 0) return true;
    return false;
}

OracleLimits limits(const Common& c) {
    OracleLimits lim;
    lim.max_jobs = c.oracle_max_jobs;
    lim.max_machines = c.oracle_max_machines;
    return lim;
}

int cmd_solve(const Common& c, const std::string& path) {
    Instance inst = read_instance_file(path);
    Profile prof = parse_profile(c.profile);
    TimedSchedule s;
    double value;
    if (has_release(inst)) {
        ReleaseOptions opt;
        opt.oracle_max_jobs = c.oracle_max_jobs;
        opt.oracle_max_machines = c.oracle_max_machines;
        ReleaseResult r = eptas_release(inst, make_params(c.eps, prof, true), opt);
        s = r.schedule;
        value = r.cost;
        if (r.fallback) std::cerr << "note: fewer than 2/d^7+3 machines, exact search used\n";
    } else {
        NoReleaseResult r = eptas_no_release(inst, make_params(c.eps, prof, false));
        s = to_timed(inst, r.schedule);
        value = r.cost;
    }
    emit(c.out, schedule_text(inst, s));
    std::cerr << "cost " << value << "\n";
    return 0;
}

int cmd_oracle(const Common& c, const std::string& path, const std::string& objective) {
    Instance inst = read_instance_file(path);
    OracleLimits lim = limits(c);
    TimedSchedule s;
    double value;
    if (has_release(inst)) {
        OracleLimits rl = release_limits();
        rl.max_jobs = lim.max_jobs;
        rl.max_machines = lim.max_machines;
        if (objective == "pseudo") {
            ParamPack p = make_params(c.eps, parse_profile(c.profile), true);
            inst = round_release(inst, p);
            rl.objective = Objective::pseudo_cost;
            rl.timely = true;
            rl.delta = p.delta;
        }
        TimedResult r = opt_release(inst, rl);
        s = r.schedule;
        value = r.value;
    } else {
        OrderedResult r = opt_no_release(inst, lim);
        s = to_timed(inst, r.schedule);
        value = r.value;
    }
    emit(c.out, schedule_text(inst, s));
    std::cerr << "optimum " << value << "\n";
    return 0;
}

int cmd_verify(const Common& c, const std::string& path, const std::string& sched_path, bool timely) {
    Instance inst = read_instance_file(path);
    TimedSchedule s = read_schedule_file(sched_path, inst);
    validate(inst, s);
    if (timely) {
        double delta = make_params(c.eps, parse_profile(c.profile), true).delta;
        TimelyCheck tc = is_timely(inst, s, delta);
        if (!tc.timely) {
            std::cerr << "error: job " << inst.jobs[tc.job].id << " starts at " << tc.start << ", before "
                      << tc.required << "\n";
            return 3;
        }
    }
    std::ostringstream os;
    os.precision(12);
    os << "valid cost " << cost(inst, s).total << "\n";
    emit(c.out, os.str());
    return 0;
}

struct BenchRow {
    std::string suite;
    uint64_t seed;
    std::string shape;
    int n, m;
    double eps, cost, oracle, ratio;
    bool ok;
};

int cmd_bench(const Common& c, const std::string& suite, int count) {
    std::vector<BenchRow> rows;
    const bool release = suite == "release";
    if (suite != "small" && suite != "release") throw std::invalid_argument("unknown suite '" + suite + "'");
    Profile prof = parse_profile(c.profile);
    for (int x = 0; x < count; ++x) {
        GenSpec g;
        g.seed = c.seed + static_cast<uint64_t>(x);
        if (release) {
            g.shape = Shape::release_bursts;
            g.n = 2 + x % 4;
        } else {
            g.shape = x % 2 ? Shape::bimodal_density : Shape::uniform;
            g.n = 2 + x % 5;
        }
        g.m = 1 + x % 2;
        Instance inst = generate(g);
        BenchRow r{suite, g.seed, to_string(g.shape), inst.n(), inst.m(), c.eps, 0, 0, 0, false};
        if (release) {
            ParamPack p = make_params(c.eps, prof, true);
            ReleaseOptions opt;
            opt.oracle_max_jobs = c.oracle_max_jobs;
            opt.oracle_max_machines = c.oracle_max_machines;
            ReleaseResult res = eptas_release(inst, p, opt);
            Instance ap = round_release(inst, p);
            OracleLimits lim = release_limits();
            lim.objective = Objective::pseudo_cost;
            lim.timely = true;
            lim.delta = p.delta;
            r.cost = res.pseudo_cost;
            r.oracle = opt_release(ap, lim).value;
        } else {
            NoReleaseResult res = eptas_no_release(inst, make_params(c.eps, prof, false));
            r.cost = res.cost;
            r.oracle = opt_no_release(inst, limits(c)).value;
        }
        r.ratio = r.cost / r.oracle;
        r.ok = r.ratio <= 1 + c.eps + 1e-9;
        rows.push_back(r);
    }
    std::ostringstream os;
    os.precision(12);
    os << "suite,seed,shape,n,m,eps,cost,oracle,ratio,ok\n";
    bool all = true;
    for (const auto& r : rows) {
        os << r.suite << ',' << r.seed << ',' << r.shape << ',' << r.n << ',' << r.m << ',' << r.eps << ',' << r.cost
           << ',' << r.oracle << ',' << r.ratio << ',' << (r.ok ? "pass" : "fail") << '\n';
        all = all && r.ok;
    }
    emit(c.out, os.str());
    return all ? 0 : 4;
}

int cmd_ledger(const Common& c, const std::string& path, bool force) {
    Instance inst = read_instance_file(path);
    Profile prof = parse_profile(c.profile);
    bool pass = true;
    std::string csv;
    if (has_release(inst)) {
        ReleaseOptions opt;
        opt.force_pipeline = force;
        opt.oracle_max_jobs = c.oracle_max_jobs;
        opt.oracle_max_machines = c.oracle_max_machines;
        ReleaseResult r = eptas_release(inst, make_params(c.eps, prof, true), opt);
        for (const auto& row : r.ledger)
            if (row.check != "ok" && row.check != "exact") pass = false;
        csv = release_ledger_csv(r.ledger);
    } else {
        NoReleaseResult r = eptas_no_release(inst, make_params(c.eps, prof, false));
        for (const auto& row : r.ledger)
            if (row.oracle_cost && row.schedule_cost > (1 + c.eps) * *row.oracle_cost + 1e-9) pass = false;
        csv = ledger_csv(r.ledger);
    }
    emit(c.out, csv);
    return pass ? 0 : 4;
}

int cmd_generate(const Common& c, const std::string& shape, int n, int m, double snap) {
    GenSpec g;
    g.shape = parse_shape(shape);
    g.n = n;
    g.m = m;
    g.seed = c.seed;
    g.snap_delta = snap;
    std::ostringstream os;
    write_instance(os, generate(g));
    emit(c.out, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted completion time on related machines"};
    app.require_subcommand(1);
    Common c;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--eps", c.eps, "accuracy in (0,1]")->check(CLI::Range(1e-9, 1.0));
        sub->add_option("--profile", c.profile, "faithful or practical");
        sub->add_option("--seed", c.seed, "base seed");
        sub->add_option("--oracle-max-jobs", c.oracle_max_jobs);
        sub->add_option("--oracle-max-machines", c.oracle_max_machines);
        sub->add_option("--out", c.out, "output file");
    };

    std::string instance, schedule, objective = "cost", suite = "small", shape = "uniform";
    bool timely = false, force = false;
    int count = 20, n = 6, m = 2;
    double snap = 0;

    auto* solve = app.add_subcommand("solve", "run the approximation scheme");
    common(solve);
    solve->add_option("instance", instance)->required();

    auto* oracle = app.add_subcommand("oracle", "exact optimum by enumeration");
    common(oracle);
    oracle->add_option("instance", instance)->required();
    oracle->add_option("--objective", objective, "cost or pseudo");

    auto* verify = app.add_subcommand("verify", "check a schedule file");
    common(verify);
    verify->add_option("instance", instance)->required();
    verify->add_option("schedule", schedule)->required();
    verify->add_flag("--timely", timely, "also require starts at or after d p/s");

    auto* bench = app.add_subcommand("bench", "seeded suite against the oracle");
    common(bench);
    bench->add_option("--suite", suite, "small or release");
    bench->add_option("--count", count);

    auto* ledger = app.add_subcommand("ledger", "per-stage audit CSV");
    common(ledger);
    ledger->add_option("instance", instance)->required();
    ledger->add_flag("--force-pipeline", force, "run the structured release pipeline on few machines");

    auto* gen = app.add_subcommand("generate", "write a seeded instance");
    common(gen);
    gen->add_option("--shape", shape, "uniform, bimodal-density, release-bursts, power-speeds");
    gen->add_option("--n", n);
    gen->add_option("--m", m);
    gen->add_option("--snap", snap, "round fields up to powers of 1+snap");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*solve) return cmd_solve(c, instance);
        if (*oracle) return cmd_oracle(c, instance, objective);
        if (*verify) return cmd_verify(c, instance, schedule, timely);
        if (*bench) return cmd_bench(c, suite, count);
        if (*ledger) return cmd_ledger(c, instance, force);
        if (*gen) return cmd_generate(c, shape, n, m, snap);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
