#include "wct/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace wct {

namespace {

std::string strip(const std::string& line) {
    auto pos = line.find('#');
    std::string s = pos == std::string::npos ? line : line.substr(0, pos);
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T field(std::istringstream& is, int line, const char* what) {
    T v;
    if (!(is >> v)) throw ParseError(line, std::string("expected ") + what);
    return v;
}

void expect_end(std::istringstream& is, int line) {
    std::string extra;
    if (is >> extra) throw ParseError(line, "unexpected token '" + extra + "'");
}

}  // namespace

Instance read_instance(std::istream& in) {
    Instance inst;
    std::string raw;
    int line = 0, m = -1, n = -1;
    bool header = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = strip(raw);
        if (s.empty()) continue;
        std::istringstream is(s);
        if (!header) {
            m = field<int>(is, line, "machine count");
            n = field<int>(is, line, "job count");
            int r = field<int>(is, line, "has_release flag");
            expect_end(is, line);
            if (m < 1) throw ParseError(line, "machine count must be positive");
            if (n < 0) throw ParseError(line, "job count must be nonnegative");
            if (r != 0 && r != 1) throw ParseError(line, "has_release must be 0 or 1");
            inst.has_release = r == 1;
            header = true;
            continue;
        }
        std::string kind = field<std::string>(is, line, "record kind");
        if (kind == "machine") {
            Machine mc;
            mc.id = field<int>(is, line, "machine id");
            mc.speed = field<double>(is, line, "speed");
            expect_end(is, line);
            if (!(mc.speed > 0) || !std::isfinite(mc.speed)) throw ParseError(line, "speed must be positive");
            inst.machines.push_back(mc);
        } else if (kind == "job") {
            Job j;
            j.id = field<int>(is, line, "job id");
            j.size = field<double>(is, line, "size");
            j.weight = field<double>(is, line, "weight");
            j.release = field<double>(is, line, "release");
            expect_end(is, line);
            if (!(j.size > 0) || !std::isfinite(j.size)) throw ParseError(line, "size must be positive");
            if (!(j.weight > 0) || !std::isfinite(j.weight)) throw ParseError(line, "weight must be positive");
            if (!(j.release >= 0) || !std::isfinite(j.release)) throw ParseError(line, "release must be nonnegative");
            if (j.release > 0 && !inst.has_release) throw ParseError(line, "release date in an instance without releases");
            inst.jobs.push_back(j);
        } else {
            throw ParseError(line, "unknown record '" + kind + "'");
        }
    }
    if (!header) throw ParseError(line + 1, "missing header");
    if (inst.m() != m) throw ParseError(line, "header announces " + std::to_string(m) + " machines, found " +
                                                  std::to_string(inst.m()));
    if (inst.n() != n)
        throw ParseError(line, "header announces " + std::to_string(n) + " jobs, found " + std::to_string(inst.n()));
    inst.check();
    return inst;
}

Instance read_instance_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open " + path);
    return read_instance(f);
}

void write_instance(std::ostream& out, const Instance& inst) {
    out.precision(17);
    out << inst.m() << " " << inst.n() << " " << (inst.has_release ? 1 : 0) << "\n";
    for (const auto& m : inst.machines) out << "machine " << m.id << " " << m.speed << "\n";
    for (const auto& j : inst.jobs) out << "job " << j.id << " " << j.size << " " << j.weight << " " << j.release << "\n";
}

TimedSchedule read_schedule(std::istream& in, const Instance& inst) {
    std::map<int, int> job_at, machine_at;
    for (int j = 0; j < inst.n(); ++j) job_at[inst.jobs[j].id] = j;
    for (int i = 0; i < inst.m(); ++i) machine_at[inst.machines[i].id] = i;
    TimedSchedule s;
    s.slots.assign(inst.n(), Slot{});
    std::vector<bool> seen(inst.n(), false);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string t = strip(raw);
        if (t.empty()) continue;
        std::istringstream is(t);
        if (field<std::string>(is, line, "'job'") != "job") throw ParseError(line, "expected 'job'");
        int jid = field<int>(is, line, "job id");
        if (field<std::string>(is, line, "'machine'") != "machine") throw ParseError(line, "expected 'machine'");
        int mid = field<int>(is, line, "machine id");
        if (field<std::string>(is, line, "'completion'") != "completion") throw ParseError(line, "expected 'completion'");
        double c = field<double>(is, line, "completion time");
        expect_end(is, line);
        auto jt = job_at.find(jid);
        if (jt == job_at.end()) throw ParseError(line, "unknown job " + std::to_string(jid));
        auto mt = machine_at.find(mid);
        if (mt == machine_at.end()) throw ParseError(line, "unknown machine " + std::to_string(mid));
        if (seen[jt->second]) throw ParseError(line, "job " + std::to_string(jid) + " listed twice");
        seen[jt->second] = true;
        s.slots[jt->second] = Slot{mt->second, c};
    }
    for (int j = 0; j < inst.n(); ++j)
        if (!seen[j]) throw ParseError(line, "job " + std::to_string(inst.jobs[j].id) + " missing from schedule");
    return s;
}

TimedSchedule read_schedule_file(const std::string& path, const Instance& inst) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open " + path);
    return read_schedule(f, inst);
}

void write_schedule(std::ostream& out, const Instance& inst, const TimedSchedule& s) {
    out.precision(17);
    for (int j = 0; j < inst.n(); ++j)
        out << "job " << inst.jobs[j].id << " machine " << inst.machines[s.slots[j].machine].id << " completion "
            << s.slots[j].completion << "\n";
}

Shape parse_shape(const std::string& s) {
    if (s == "uniform") return Shape::uniform;
    if (s == "bimodal-density") return Shape::bimodal_density;
    if (s == "release-bursts") return Shape::release_bursts;
    if (s == "power-speeds") return Shape::power_speeds;
    throw DomainError("unknown shape '" + s + "'");
}

std::string to_string(Shape s) {
    switch (s) {
        case Shape::uniform: return "uniform";
        case Shape::bimodal_density: return "bimodal-density";
        case Shape::release_bursts: return "release-bursts";
        case Shape::power_speeds: return "power-speeds";
    }
    return "?";
}

Instance generate(const GenSpec& spec) {
    if (spec.n < 0 || spec.m < 1) throw DomainError("generator needs n >= 0 and m >= 1");
    std::mt19937_64 rng(spec.seed);
    auto unif = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    Instance inst;
    for (int i = 0; i < spec.m; ++i) {
        Machine mc;
        mc.id = i;
        if (spec.shape == Shape::power_speeds) {
            int k = std::uniform_int_distribution<int>(-8, 0)(rng);
            mc.speed = std::pow(1.0 + spec.power_delta, k);
        } else {
            mc.speed = i == 0 ? 1.0 : unif(0.25, 1.0);
        }
        inst.machines.push_back(mc);
    }
    inst.has_release = spec.shape == Shape::release_bursts;
    const int bursts = 1 + spec.n / 3;
    for (int j = 0; j < spec.n; ++j) {
        Job job;
        job.id = j;
        job.size = unif(1, 10);
        double density = unif(0.5, 2);
        if (spec.shape == Shape::bimodal_density) density = j % 2 ? unif(0.1, 0.5) : unif(5, 20);
        job.weight = job.size * density;
        if (inst.has_release) {
            int b = std::uniform_int_distribution<int>(0, bursts - 1)(rng);
            double centre = b == 0 ? 0.0 : 2.0 * std::pow(3.0, b - 1);
            job.release = centre == 0 ? 0.0 : centre * unif(1.0, 1.2);
        }
        inst.jobs.push_back(job);
    }
    if (spec.snap_delta > 0) {
        Geo geo(spec.snap_delta);
        for (auto& j : inst.jobs) {
            j.size = geo.value(geo.ceil_log(j.size));
            j.weight = geo.value(geo.ceil_log(j.weight));
        }
        for (auto& m : inst.machines) m.speed = geo.value(geo.floor_log(m.speed));
    }
    return inst;
}

}  // namespace wct
