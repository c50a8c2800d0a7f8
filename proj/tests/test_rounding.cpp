#include <doctest.h>

#include <set>

#include "support.hpp"
#include "wct/rounding.hpp"

using namespace wct;
using namespace testing_support;

TEST_SUITE("rounding") {

TEST_CASE("practical constants for eps 0.5 and 0.75") {
    ParamPack p = make_params(0.5, Profile::practical, true);
    CHECK(p.inv_delta() == 8);
    CHECK(p.xi == 2);
    REQUIRE(p.zeta_count.has_value());
    CHECK(*p.zeta_count == 7);
    CHECK(p.y == 11);
    CHECK(p.y_hat == 4);
    CHECK(p.alpha == doctest::Approx(4.0 * 4096));
    ParamPack q = make_params(0.75, Profile::practical, true);
    CHECK(q.inv_delta() == 6);
    CHECK(q.alpha == doctest::Approx(4.0 * 1296));
    CHECK_THROWS_AS(make_params(0, Profile::practical, false), DomainError);
    CHECK_THROWS_AS(make_params(1.5, Profile::practical, false), DomainError);
}

TEST_CASE("faithful xi is the least exponent reaching (1/d)^ell") {
    for (int inv : {8, 16, 36}) {
        double d = 1.0 / inv;
        ParamPack p = make_params_for_delta(d, Profile::faithful, false);
        double target = std::pow(inv, p.ell);
        CHECK(std::pow(1 + d, static_cast<double>(p.xi)) >= target * (1 - 1e-12));
        CHECK(std::pow(1 + d, static_cast<double>(p.xi - 1)) < target);
        CHECK_FALSE(p.g_exact);
    }
    ParamPack r = make_params_for_delta(1.0 / 36, Profile::faithful, true);
    CHECK(r.ell == 25);
    CHECK_FALSE(r.zeta_count.has_value());
}

TEST_CASE("rounded fields are powers of 1+d in the right direction") {
    Rng r(21);
    ParamPack p = make_params(0.5, Profile::practical, false);
    Geo g(p.delta);
    for (int it = 0; it < 100; ++it) {
        Instance a = random_instance(r, r.pick(1, 6), r.pick(1, 3));
        Instance b = round_no_release(a, p);
        for (int j = 0; j < a.n(); ++j) {
            CHECK(b.jobs[j].size >= a.jobs[j].size * (1 - 1e-12));
            CHECK(b.jobs[j].size < a.jobs[j].size * (1 + p.delta));
            CHECK(b.jobs[j].weight >= a.jobs[j].weight * (1 - 1e-12));
            CHECK(g.exact_log(b.jobs[j].size).has_value());
        }
        for (int l = 0; l < a.m(); ++l) {
            CHECK(b.machines[l].speed <= a.machines[l].speed * (1 + 1e-12));
            CHECK(b.machines[l].speed > a.machines[l].speed / (1 + p.delta));
        }
    }
}

TEST_CASE("release rounding never shortens processing or moves releases earlier") {
    Rng r(22);
    ParamPack p = make_params(0.75, Profile::practical, true);
    for (int it = 0; it < 100; ++it) {
        Instance a = random_instance(r, r.pick(1, 6), r.pick(1, 3), true);
        Instance b = round_release(a, p);
        for (int j = 0; j < a.n(); ++j) {
            CHECK(b.jobs[j].release > a.jobs[j].release);
            for (int l = 0; l < a.m(); ++l)
                CHECK(b.jobs[j].size / b.machines[l].speed >= a.jobs[j].size / a.machines[l].speed * (1 - 1e-12));
        }
    }
}

TEST_CASE("shifted densities avoid the forbidden block and only go up") {
    Rng r(23);
    ParamPack p = make_params(0.5, Profile::practical, false);
    for (int it = 0; it < 50; ++it) {
        Instance a = round_no_release(random_instance(r, r.pick(1, 7), 2), p);
        for (int64_t z : relevant_zetas(a, p)) {
            Instance s = density_shift(a, z, p);
            std::set<int> seen;
            for (int j = 0; j < a.n(); ++j) {
                CHECK_FALSE(is_forbidden(s.jobs[j].density_exp(), z, p));
                CHECK(s.jobs[j].density_exp() >= a.jobs[j].density_exp());
                CHECK(s.jobs[j].size_e == a.jobs[j].size_e);
            }
            for (const Band& b : split_into_bands(s, z, p))
                for (int j : b.jobs) CHECK(seen.insert(j).second);
            CHECK(static_cast<int>(seen.size()) == a.n());
        }
    }
}

TEST_CASE("divisions: worked case and pseudo-size bracket") {
    for (double d : {0.125, 1.0 / 36}) {
        Geo g(d);
        DivisionInfo w = divisions(1, d);
        CHECK(w.division == 1);
        CHECK(w.subdivision == 0);
        for (int64_t i = -30; i <= 30; ++i) {
            DivisionInfo x = divisions(i, d);
            CHECK(x.pseudo_size >= g.value(i) * (1 - 1e-12));
            CHECK(x.pseudo_size < g.value(i) * (1 + d));
        }
    }
}

TEST_CASE("pseudo instance keeps exponents") {
    ParamPack p = make_params(0.5, Profile::practical, false);
    Rng r(2);
    Instance a = round_no_release(random_instance(r, 5, 2), p);
    Instance ps = to_pseudo_instance(a);
    for (int j = 0; j < a.n(); ++j) {
        CHECK(ps.jobs[j].size_e == a.jobs[j].size_e);
        CHECK(ps.jobs[j].size == doctest::Approx(divisions(a.jobs[j].size_e.exponent, p.delta).pseudo_size));
    }
    CHECK_THROWS_AS(to_pseudo_instance(random_instance(r, 2, 1)), DomainError);
}

}  // TEST_SUITE
