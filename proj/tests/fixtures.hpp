#pragma once

// Hand-built inputs for the two combining passes.

#include "support.hpp"
#include "wct/release_eptas.hpp"

namespace testing_support {

struct BandFixture {
    Instance inst;
    std::vector<BandSchedule> bands;
    double max_release = 0;
    std::vector<int> postponed;  // jobs expected to be pushed past a denser window
};

// Per machine: a dense job A in window t0 (band 2), and in band 1 a job D in
// window t0+20, a sparse job B in window t0+10 and a light job C in window
// t0-4, which lies under A's window and has to be postponed.
inline BandFixture band_fixture(Rng& r, double delta, int machines) {
    Geo g(delta);
    BandFixture f;
    f.inst.has_release = true;
    f.bands = {{2, {}}, {1, {}}};
    std::vector<std::pair<int, Slot>> placed;  // (band, slot) per job
    auto width = [&](int64_t t) { return g.value(t + 1) - g.value(t); };
    for (int u = 0; u < machines; ++u) {
        const int64_t se = r.pick(-2, 0);
        const double s = g.value(se);
        f.inst.machines.push_back({u, s, {se}});
        const int64_t t0 = r.pick(8, 14);
        auto job = [&](int band, double size, double weight, int64_t t, double offset) {
            Job j;
            j.id = f.inst.n();
            j.size = size;
            j.weight = weight;
            j.release = 1;
            f.inst.jobs.push_back(j);
            double st = g.value(t) + offset * width(t);
            placed.push_back({band, {u, st + size / s}});
            return j.id;
        };
        job(0, r.uni(0.3, 0.6) * s * width(t0), 1, t0, 0.1);
        job(1, r.uni(0.3, 0.6) * s * width(t0 + 20), g.value(-5), t0 + 20, 0.1);
        job(1, std::pow(delta, 6) * s * g.value(t0 + 10), g.value(-10), t0 + 10, 0.2);
        f.postponed.push_back(job(1, r.uni(0.1, 0.3) * s * width(t0 - 4), g.value(-200), t0 - 4, 0.1));
    }
    for (auto& b : f.bands) b.schedule.slots.assign(f.inst.n(), {});
    for (int j = 0; j < f.inst.n(); ++j) f.bands[placed[j].first].schedule.slots[j] = placed[j].second;
    f.max_release = g.value(300);
    return f;
}

struct PartFixture {
    Instance inst;
    std::vector<PartSchedule> parts;
    int overflow_job = -1;
};

// One machine, one part with frame end (1+d)^20: a base job Y well inside the
// frame and a nearly weightless job X that runs past the frame end.
inline PartFixture part_fixture(double delta) {
    Geo g(delta);
    PartFixture f;
    f.inst.has_release = true;
    f.inst.machines = {{0, 1, {0}}};
    f.inst.jobs = {{0, 0.5, 1, g.value(14), {}, {}, {}}, {1, 3, g.value(-120), g.value(18), {}, {}, {}}};
    f.overflow_job = 1;
    PartSchedule p;
    p.psi = 1;
    p.psi_next = g.value(20);
    p.schedule.slots = {{0, g.value(14) + 0.5}, {0, g.value(18) + 3}};
    f.parts.push_back(p);
    return f;
}

}  // namespace testing_support
