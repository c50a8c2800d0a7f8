#include <doctest.h>

#include "support.hpp"
#include "wct/core.hpp"

using namespace wct;
using namespace testing_support;

TEST_SUITE("core") {

TEST_CASE("geo exponents round trip on exact powers") {
    for (double d : {0.125, 1.0 / 16, 1.0 / 36}) {
        Geo g(d);
        for (int64_t e = -60; e <= 60; ++e) {
            CHECK(g.ceil_log(g.value(e)) == e);
            CHECK(g.floor_log(g.value(e)) == e);
            REQUIRE(g.exact_log(g.value(e)).has_value());
            CHECK(*g.exact_log(g.value(e)) == e);
        }
    }
}

TEST_CASE("geo ceil and floor bracket arbitrary values") {
    Rng r(11);
    Geo g(0.125);
    for (int k = 0; k < 2000; ++k) {
        double x = std::exp(r.uni(-20, 20));
        int64_t c = g.ceil_log(x), f = g.floor_log(x);
        CHECK(g.value(c) >= x * (1 - 1e-12));
        CHECK(g.value(c - 1) < x);
        CHECK(g.value(f) <= x * (1 + 1e-12));
        CHECK(g.value(f + 1) > x);
        CHECK(c - f <= 1);
    }
    CHECK_THROWS_AS(g.ceil_log(0), DomainError);
    CHECK_THROWS_AS(Geo(0), DomainError);
}

TEST_CASE("cost of a hand-built ordered schedule") {
    // three jobs on one unit machine: completions 1, 3, 6
    Instance inst;
    inst.machines = {{0, 1.0, {}}};
    inst.jobs = {{0, 3, 1, 0, {}, {}, {}}, {1, 1, 2, 0, {}, {}, {}}, {2, 2, 2, 0, {}, {}, {}}};
    OrderedSchedule s{{{1, 2, 0}}};
    CHECK(cost(inst, s).total == doctest::Approx(2 * 1 + 2 * 3 + 1 * 6));
    TimedSchedule t = to_timed(inst, s);
    CHECK(t.slots[0].completion == doctest::Approx(6));
    OrderedSchedule back = to_ordered(inst, t);
    CHECK(back.machines[0] == std::vector<int>{1, 2, 0});
}

TEST_CASE("validation rejects overlaps, early starts and missing jobs") {
    Instance inst;
    inst.machines = {{0, 1.0, {}}, {1, 2.0, {}}};
    inst.jobs = {{0, 2, 1, 0, {}, {}, {}}, {1, 2, 1, 1, {}, {}, {}}};
    inst.has_release = true;
    TimedSchedule ok{{{0, 2}, {1, 2}}};
    CHECK_NOTHROW(validate(inst, ok));
    TimedSchedule overlap{{{0, 2}, {0, 3}}};
    CHECK_THROWS_AS(validate(inst, overlap), ValidationError);
    TimedSchedule early{{{0, 2}, {1, 1.5}}};
    CHECK_THROWS_AS(validate(inst, early), ValidationError);
    TimedSchedule unknown{{{0, 2}, {5, 9}}};
    CHECK_THROWS_AS(validate(inst, unknown), ValidationError);
    OrderedSchedule twice{{{0, 0}, {1}}};
    CHECK_THROWS_AS(validate(inst, twice), ValidationError);
}

TEST_CASE("natural order sorts by density, then size, then id") {
    std::vector<Job> jobs = {{0, 2, 2, 0, {}, {}, {}}, {1, 1, 3, 0, {}, {}, {}}, {2, 4, 4, 0, {}, {}, {}},
                             {3, 1, 1, 0, {}, {}, {}}};
    auto out = natural_order(jobs);
    std::vector<int> ids;
    for (auto& j : out) ids.push_back(j.id);
    CHECK(ids == std::vector<int>{1, 2, 0, 3});
}

TEST_CASE("pseudo-cost lies between cost and (1+d) cost") {
    Rng r(5);
    for (int it = 0; it < 200; ++it) {
        Instance inst = random_instance(r, r.pick(1, 6), r.pick(1, 3), true);
        TimedSchedule s = random_timely_schedule(r, inst, 0.125);
        double c = cost(inst, s).total;
        double pc = pseudo_cost(inst, s, Geo(0.125)).total;
        CHECK(pc >= c * (1 - 1e-12));
        CHECK(pc <= 1.125 * c * (1 + 1e-12));
    }
}

TEST_CASE("timeliness flags the first job that starts before d p/s") {
    Instance inst;
    inst.machines = {{0, 1.0, {}}};
    inst.jobs = {{0, 8, 1, 0, {}, {}, {}}};
    CHECK(is_timely(inst, TimedSchedule{{{0, 9}}}, 0.125).timely);
    auto bad = is_timely(inst, TimedSchedule{{{0, 8.5}}}, 0.125);
    CHECK_FALSE(bad.timely);
    CHECK(bad.required == doctest::Approx(1.0));
}

TEST_CASE("gamma lower bound never exceeds a gamma sum") {
    Rng r(3);
    for (int it = 0; it < 300; ++it) {
        int n = r.pick(1, 5);
        std::vector<Job> jobs;
        for (int j = 0; j < n; ++j) jobs.push_back({j, r.uni(0.1, 5), r.uni(0.1, 5), 0, {}, {}, {}});
        double sp = r.uni(0.5, 2);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        do {
            std::vector<Job> seq;
            for (int j : order) seq.push_back(jobs[j]);
            CHECK(gamma_lower_bound(jobs, sp) <= gamma_sum(seq, sp) * (1 + 1e-12));
        } while (std::next_permutation(order.begin(), order.end()));
    }
}

TEST_CASE("block gamma equals the per-job gamma sum of equal-density jobs") {
    Rng r(9);
    for (int it = 0; it < 500; ++it) {
        double dens = r.uni(0.1, 4), sp = r.uni(0.5, 3), start = r.uni(0, 10);
        int n = r.pick(1, 6);
        double t = start, g = 0, total = 0;
        for (int j = 0; j < n; ++j) {
            double p = r.uni(0.1, 3);
            t += p / sp;
            g += dens * p * (t - p / (2 * sp));
            total += p;
        }
        CHECK(block_gamma(total, dens, start, sp) == doctest::Approx(g).epsilon(1e-9));
    }
}

TEST_CASE("instance hash is stable and sensitive") {
    Rng r(1);
    Instance a = random_instance(r, 4, 2);
    Instance b = a;
    CHECK(instance_hash(a) == instance_hash(b));
    b.jobs[0].weight += 1e-9;
    CHECK(instance_hash(a) != instance_hash(b));
    CHECK(instance_hash(a).size() == 16);
}

}  // TEST_SUITE
