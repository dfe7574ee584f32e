#include "doctest.h"

#include <cmath>

#include "nakasim/security_calc.hpp"

using namespace nakasim;

TEST_CASE("p_good")
{
    CHECK(p_good(0.25, 0.1, 4) == doctest::Approx(0.75 * 0.1 * std::exp(-0.5) / (1 - std::exp(-0.1))));
    CHECK(p_good(0.25, 0.1, 4) == doctest::Approx(0.478).epsilon(0.002));
    CHECK(p_good(0.0, 1e-12, 3) == doctest::Approx(1.0));
    CHECK(p_good(0.0, 0.0, 3) == 1.0);
    CHECK(p_good(0.4, 0.0, 3) == doctest::Approx(0.6));
}

TEST_CASE("p_good_limit matches p_good for short slots")
{
    CHECK(p_good_limit(0.5, 0.0, 0.0, 10.0, 1.0) == doctest::Approx(0.5));
    double beta = 0.2, lambda = 0.05, c_tilde = 20.0, cap = 1.0, tau = 1e-4;
    double rho = lambda * tau;
    auto nu = static_cast<std::int64_t>(std::llround(c_tilde / cap / tau)) - 1;
    CHECK(std::abs(p_good(beta, rho, nu) - p_good_limit(beta, lambda, 0.0, c_tilde, cap)) < 1e-3);
}

TEST_CASE("p_pp")
{
    CHECK(p_pp(0.75) == doctest::Approx(1.0 / 3.0));
    CHECK(p_pp(1.0) == doctest::Approx(1.0));
    CHECK(p_pp(0.5) == 0.0);
    CHECK(p_pp(0.3) == 0.0);
}

TEST_CASE("Hoeffding tail")
{
    CHECK(hoeffding_tail_x(0.25, 1.0, 100) == doctest::Approx(std::exp(-12.5)));
    CHECK(hoeffding_tail_x(0.25, 0.0, 100) == 1.0);
}

TEST_CASE("CP condition boundary")
{
    // c (2p-1)^2 > 16 p at p = .75: c > 48
    CHECK(cp_condition(49.0, 0.75));
    CHECK_FALSE(cp_condition(48.0, 0.75));
    CHECK_FALSE(cp_condition(1e9, 0.5));
    double p = cp_boundary_p(40.0);
    CHECK(p_pp(p) == doctest::Approx(16.0 / 40.0));
    CHECK(cp_condition(40.0, p + 1e-6));
    CHECK_FALSE(cp_condition(40.0, p - 1e-6));
}

TEST_CASE("max_rate")
{
    RatePoint r = max_rate(0.0, 1.0, 0.0);
    CHECK(r.lambda_max == doctest::Approx(0.0062783).epsilon(1e-4));
    CHECK(r.c_tilde == doctest::Approx(36.4).epsilon(0.01));
    RatePoint g = max_rate_grid(0.0, 1.0, 0.0, 0.01);
    CHECK(r.lambda_max >= g.lambda_max - 1e-12);
    // rate scales with capacity when delta_h = 0
    CHECK(max_rate(0.0, 4.0, 0.0).lambda_max == doctest::Approx(4 * r.lambda_max));
    CHECK(max_rate(0.2, 1.0, 0.0).lambda_max < r.lambda_max);
    CHECK(max_rate(0.2, 1.0, 1.0).lambda_max < max_rate(0.2, 1.0, 0.0).lambda_max);
    CHECK_THROWS_AS(max_rate(0.5, 1.0, 0.0), Insecure);
    CHECK_THROWS_AS(max_rate(0.7, 1.0, 0.0), Insecure);
}

TEST_CASE("region curve marks insecure betas")
{
    auto rows = region_curve({0.0, 0.3, 0.5, 0.6}, 1.0, 0.0);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].secure);
    CHECK(rows[1].secure);
    CHECK(rows[1].lambda_max < rows[0].lambda_max);
    CHECK_FALSE(rows[2].secure);
    CHECK_FALSE(rows[3].secure);
    auto ref = bounded_delay_reference({0.1, 0.5}, 2.0);
    CHECK(ref[0].lambda_max == doctest::Approx(0.8 / (0.1 * 0.9 * 0.5)));
    CHECK_FALSE(ref[1].secure);
}

TEST_CASE("pp_tail falls as K2 grows")
{
    double pg = 0.9, pp = p_pp(pg);
    double ax = alpha_x(eps_good(pg)), ap = alpha_p(pp);
    double prev = 1e300;
    for (double k2 = 10; k2 <= 200; k2 += 10) {
        double v = pp_tail(2000, k2, 0.9, 100, pp, ax, ap);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("choose_kcp meets the target")
{
    auto c = choose_kcp(0.9, 0.9, 1e4, 0.01);
    REQUIRE(c);
    CHECK(c->k_cp == 2 * c->k1 * c->k2);
    CHECK(c->bound < 0.01);
    CHECK_FALSE(choose_kcp(0.5, 0.9, 1e4, 0.01));
    // a looser target never needs a larger K_cp
    CHECK(choose_kcp(0.9, 0.9, 1e4, 0.1)->k_cp <= c->k_cp);
}

TEST_CASE("liveness latency")
{
    Liveness l = liveness_latency(5, 0.1, 1.0, 0.1, 0.5, 0.0);
    CHECK(l.simple == doctest::Approx(320.0));
    CHECK(l.refined == doctest::Approx(10.0 / 0.05 + 22.0 / 0.05));
    CHECK(beta_threshold(1.0, 3.0) == doctest::Approx(0.25));
}
