#include <doctest.h>

#include <set>

#include "support.hpp"
#include "wct/oracle.hpp"
#include "wct/rounding.hpp"
#include "wct/timeline.hpp"

using namespace wct;
using namespace testing_support;

namespace {

const ParamPack kP = make_params(0.5, Profile::practical, true);

Instance rounded(Rng& r, int n, int m) { return round_release(random_instance(r, n, m, true), kP); }

}  // namespace

TEST_SUITE("timeline") {

TEST_CASE("augmentation and shifting scale costs exactly") {
    Rng r(401);
    Geo g(kP.delta);
    for (int it = 0; it < 50; ++it) {
        Instance a = rounded(r, r.pick(1, 6), r.pick(1, 3));
        TimedSchedule s = random_timely_schedule(r, a, kP.delta);
        CHECK(cost(a, time_augment(s, 1.5)).total == doctest::Approx(1.5 * cost(a, s).total).epsilon(1e-12));
        double before = pseudo_cost(a, s, g).total;
        double after = pseudo_cost(a, shift_schedule(a, s), g).total;
        CHECK(after == doctest::Approx((1 + kP.delta) * before).epsilon(1e-12));
        validate(stretched_instance(a), shift_schedule(a, s));
    }
    CHECK_THROWS_AS(time_augment({}, 1.0), DomainError);
}

TEST_CASE("valid schedules give lists passing every condition") {
    Rng r(402);
    Geo g(kP.delta);
    for (int it = 0; it < 200; ++it) {
        Instance a = rounded(r, r.pick(1, 7), r.pick(1, 3));
        TimedSchedule s = random_timely_schedule(r, a, kP.delta);
        IntervalList list = list_from_schedule(a, s);
        ListCheck c = check_list(a, list);
        REQUIRE_MESSAGE(c.ok, c.message);
        TimedSchedule back = schedule_from_list(a, list);
        validate(a, back);
        CHECK(pseudo_cost(a, back, g).total == pseudo_cost(a, s, g).total);
        IntervalList again = list_from_schedule(a, back);
        for (int j = 0; j < a.n(); ++j) CHECK(again.jobs[j].end_i == list.jobs[j].end_i);
    }
}

TEST_CASE("constructed violations name their condition") {
    Rng r(403);
    for (int it = 0; it < 40; ++it) {
        int cond = 1 + it % 4;
        ListFixture f = list_violation(r, cond, kP.delta);
        ListCheck c = check_list(f.inst, f.list);
        CHECK_FALSE(c.ok);
        CHECK(c.condition == cond);
        CHECK(c.message.find("condition " + std::to_string(cond)) != std::string::npos);
        try {
            schedule_from_list(f.inst, f.list);
            FAIL("expected a list violation");
        } catch (const ListViolation& e) {
            CHECK(e.check.condition == cond);
        }
    }
}

TEST_CASE("shifted lists keep their shape") {
    IntervalList l;
    l.jobs = {{0, 2, 0, 4}, {1, -1, 1, -1}};
    IntervalList s = l.shifted(3);
    CHECK(s.jobs[0].start_i == 5);
    CHECK(s.jobs[1].end_i == 2);
    auto cells = l.cells();
    CHECK(cells[{0, 2}].starting == std::vector<int>{0});
    CHECK(cells[{1, -1}].completing == std::vector<int>{1});
}

TEST_CASE("stretching one job") {
    const double d = kP.delta;
    Instance a = exp_instance(d, {0}, {{0, 0, -40}});
    TimedSchedule s{{{0, 3.0}}};
    StretchedSchedule st = time_stretch(a, s, d);
    CHECK(st.jobs[0].reserved_start == doctest::Approx((1 + d) * 2.0));
    CHECK(st.jobs[0].reserved_end == doctest::Approx((1 + d) * 3.0));
    CHECK(st.jobs[0].basic_start == doctest::Approx((1 + d) * 2.0 + d / 2));
    CHECK(st.overflows == 0);
    TimedSchedule late{{{0, 1.05}}};
    CHECK_THROWS_AS(time_stretch(a, late, d), DomainError);
}

TEST_CASE("stretching leaves gaps and costs at most 1+d more") {
    Rng r(404);
    const double d = kP.delta;
    Geo g(d);
    for (int it = 0; it < 100; ++it) {
        Instance a = rounded(r, r.pick(1, 7), r.pick(1, 3));
        TimedSchedule s = random_timely_schedule(r, a, d, r.coin() ? 0.0 : 3.0);
        StretchedSchedule st = time_stretch(a, s, d);
        validate(a, st.actual());
        CHECK(st.overflows == 0);
        CHECK(st.small_violations == 0);
        CHECK(st.short_gaps().empty());
        CHECK(st.output_pseudo_cost <= (1 + d) * st.input_pseudo_cost * (1 + 1e-12));
        CHECK(cost(a, st.actual()).total <= (1 + d) * cost(a, s).total * (1 + 1e-12));
        for (const auto& [key, gap] : st.gaps) {
            auto w = gap_witness(st, key.first, key.second, d);
            REQUIRE(w.has_value());
            CHECK(*w > key.second);
            CHECK(g.value(*w + 1) <= g.value(key.second) / (d * d) * (1 + 1e-12));
        }
    }
}

TEST_CASE("classification boundaries") {
    const double d = kP.delta;
    Instance a = exp_instance(d, {-2}, {{0, 0, 0}});
    IntervalKey k = interval_key(a, 0, 3);
    Geo g(d);
    const double unit = g.value(-2) * g.value(3);
    CHECK(classify_job(std::pow(d, 11) * unit, k, d) == JobClass::medium);
    CHECK(classify_job(std::pow(d, 11) * unit * 0.99, k, d) == JobClass::small);
    CHECK(classify_job(d * unit, k, d) == JobClass::medium);
    CHECK(classify_job(unit, k, d) == JobClass::large);
    CHECK(classify_job(unit / d * (1 + d) * 0.99, k, d) == JobClass::large);
    CHECK(classify_job(unit / d * (1 + d), k, d) == JobClass::huge);
    CHECK(is_big(JobClass::medium));
    CHECK_FALSE(is_big(JobClass::huge));
}

TEST_CASE("timely schedules never start huge jobs") {
    Rng r(405);
    const double d = kP.delta;
    Geo g(d);
    for (int it = 0; it < 100; ++it) {
        Instance a = rounded(r, r.pick(1, 6), r.pick(1, 3));
        TimedSchedule s = random_timely_schedule(r, a, d);
        for (int j = 0; j < a.n(); ++j) {
            int l = s.slots[j].machine;
            int64_t i = g.interval_index(start_time(a, s, j));
            IntervalKey k = interval_key(a, l, i);
            CHECK(classify_job(a.jobs[j].size, k, d) != JobClass::huge);
            if (g.interval_index(s.slots[j].completion) == i) CHECK(a.jobs[j].size < k.length);
        }
    }
}

TEST_CASE("organized schedules") {
    const double d = kP.delta;
    Instance pseudo = to_pseudo_instance(exp_instance(d, {0}, {{-10, 0, 0}, {-10, 0, -2}}));
    const double p = pseudo.jobs[0].size;
    TimedSchedule single{{{0, 1.05 + p}}};
    Instance one = pseudo;
    one.jobs.pop_back();
    CHECK(is_organized(one, single).organized);

    TimedSchedule bad{{{0, 1.05 + p}, {0, 3.0 + p}}};
    OrganizedCheck c = is_organized(pseudo, bad);
    CHECK_FALSE(c.organized);
    CHECK(c.condition == "2b");
    CHECK(c.j1 == 0);
    CHECK(c.j2 == 1);
    CHECK(is_organized(pseudo, organize_equal_jobs(pseudo, bad)).organized);
}

TEST_CASE("job shifting leaves sparse instances alone") {
    const double d = kP.delta;
    Instance a = exp_instance(d, {0, -1}, {{0, 0, 0}, {3, 1, 2}});
    JobShiftResult res = job_shift(a);
    for (int j = 0; j < a.n(); ++j) CHECK(res.shifted.jobs[j].release_e == a.jobs[j].release_e);
    CHECK(res.within_bound);
    Instance plain = a;
    plain.has_release = false;
    CHECK_THROWS_AS(job_shift(plain), DomainError);
}

TEST_CASE("many unit jobs on a slow machine spread their releases") {
    const double d = kP.delta;
    std::vector<ExpJob> jobs(10000, ExpJob{0, 0, 0});
    Instance a = exp_instance(d, {-20}, jobs);
    JobShiftResult res = job_shift(a);
    CHECK(res.within_bound);
    std::set<int64_t> rel;
    for (int j = 0; j < a.n(); ++j) {
        CHECK(res.shifted.jobs[j].release_e >= a.jobs[j].release_e);
        CHECK(res.selected_machine[j] == 0);
        rel.insert(res.shifted.jobs[j].release_e.exponent);
    }
    CHECK(rel.size() > 2);
    for (const auto& rec : res.ledger) CHECK(rec.total <= rec.bound);
}

TEST_CASE("job shifting is idempotent and only delays") {
    Rng r(406);
    for (int it = 0; it < 60; ++it) {
        Instance a = rounded(r, r.pick(1, 30), r.pick(1, 3));
        JobShiftResult res = job_shift(a);
        CHECK(res.within_bound);
        JobShiftResult again = job_shift(res.shifted);
        for (int j = 0; j < a.n(); ++j) {
            CHECK(res.shifted.jobs[j].release_e >= a.jobs[j].release_e);
            CHECK(again.shifted.jobs[j].release_e == res.shifted.jobs[j].release_e);
        }
    }
}

TEST_CASE("organized oracle schedules respect shifted releases") {
    Rng r(407);
    const double d = kP.delta;
    Geo g(d);
    int organized = 0;
    for (int it = 0; it < 30; ++it) {
        Instance pseudo = to_pseudo_instance(rounded(r, r.pick(2, 5), r.pick(1, 2)));
        OracleLimits lim = release_limits();
        lim.objective = Objective::pseudo_cost;
        lim.timely = true;
        lim.delta = d;
        TimedSchedule s = organize_equal_jobs(pseudo, opt_release(pseudo, lim).schedule);
        if (!is_organized(pseudo, s).organized) continue;
        ++organized;
        Instance tilde = job_shift(pseudo).shifted;
        for (int j = 0; j < pseudo.n(); ++j)
            CHECK(g.interval_index(start_time(pseudo, s, j)) >= tilde.jobs[j].release_e.exponent);
    }
    CHECK(organized >= 20);
}

TEST_CASE("release batches pack within their bound") {
    const double d = kP.delta;
    Instance a = exp_instance(d, {0, -1}, {{0, 0, 3}, {1, 0, 3}, {-2, 1, 3}, {0, 0, 1}});
    JobShiftResult js = job_shift(a);
    const double r = Geo(d).value(3);
    PackResult e = pack_release_batch(js.shifted, js.selected_machine, {}, r, r, kP.y_hat, true);
    CHECK(e.finish == r);
    CHECK(e.ok);
    PackResult f = pack_release_batch(js.shifted, js.selected_machine, {0, 1, 2}, r, r * 1.5, kP.y_hat, true);
    CHECK(f.ok);
    for (int j : {0, 1, 2}) CHECK(f.fragment.slots[j].machine == js.selected_machine[j]);
    CHECK(f.fragment.slots[3].machine == -1);
    PackResult s = pack_release_batch(js.shifted, js.selected_machine, {0, 3}, r, r, kP.y_hat, false);
    CHECK(s.ok);
    CHECK_THROWS_AS(pack_release_batch(js.shifted, js.selected_machine, {3}, r, r, kP.y_hat, true), DomainError);
    CHECK_THROWS_AS(pack_release_batch(js.shifted, js.selected_machine, {0}, r, r / 2, kP.y_hat, true), DomainError);
}

}  // TEST_SUITE
