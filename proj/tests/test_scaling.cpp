#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sao/riccati.hpp"
#include "sao/scaling.hpp"

using namespace sao;
namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("length scale matches the defining display") {
    // direct evaluation of 1/(beta (3/8 ln 1/beta)^{1/3})
    CHECK(length_scale(0.1) == doctest::Approx(10.5014925).epsilon(1e-6));
    // inner factor collapses to 1 at beta = e^{-8/3}
    const double beta = std::exp(-8.0 / 3.0);
    CHECK(length_scale(beta) == doctest::Approx(std::exp(8.0 / 3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(length_scale(0.5), std::domain_error);
    CHECK_THROWS_AS(length_scale(0.0), std::domain_error);
    CHECK_THROWS_AS(length_scale(-0.1), std::domain_error);
    CHECK(length_scale(0.3) > 0.0); // boundary included
}

TEST_CASE("mean explosion time approaches the large-a law") {
    // within 10% of (pi/2) e^{64/3} at a = 4
    const double m4 = mean_explosion_time(4.0);
    const double asym = 0.5 * kPi * std::exp(64.0 / 3.0);
    CHECK(std::abs(m4 - asym) / asym < 0.10);
    // monotone on the desk scale
    const double m1 = mean_explosion_time(1.0);
    const double m15 = mean_explosion_time(1.5);
    const double m2 = mean_explosion_time(2.0);
    CHECK(m1 < m15);
    CHECK(m15 < m2);
    CHECK_THROWS_AS(mean_explosion_time(-1.0), std::domain_error);
    CHECK_THROWS_AS(mean_explosion_time(1.0, QuadratureConfig{128, 1e-8}), std::invalid_argument);
}

TEST_CASE("mean explosion time agrees with the Monte Carlo oracle at a = 1") {
    // oracle: mean of >= 2000 simulated first explosion times of X_1
    std::vector<double> gammas;
    gammas.reserve(2000);
    const double horizon = 700.0;
    for (int r = 0; r < 2000; ++r) {
        BrownianPath p = BrownianPath::generate(0.0, horizon, 2e-3, derive_seed(909, r));
        IntegratorOptions o;
        o.sample_stride = 0;
        o.max_explosions = 1;
        auto t = integrate_forward(p, DriftSpec{1.0, 0.0, false}, 0.0, kPlusInfinity, horizon, o);
        REQUIRE_FALSE(t.explosions.empty());
        gammas.push_back(t.explosions.front());
    }
    double mean = 0.0;
    for (double g : gammas) mean += g;
    mean /= static_cast<double>(gammas.size());
    double var = 0.0;
    for (double g : gammas) var += (g - mean) * (g - mean);
    var /= static_cast<double>(gammas.size() - 1);
    const double half_ci = 1.96 * std::sqrt(var / static_cast<double>(gammas.size()));
    const double mq = mean_explosion_time(1.0);
    CHECK(mq > mean - half_ci);
    CHECK(mq < mean + half_ci);
}

TEST_CASE("m is strictly increasing at quadrature resolution") {
    double prev = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double a = 0.5 + 3.5 * static_cast<double>(i) / 49.0;
        const double m = mean_explosion_time(a);
        CHECK(m > prev);
        prev = m;
    }
}

TEST_CASE("a_L inversion round-trips through m") {
    CHECK(a_L_inverse(mean_explosion_time(2.0)) == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(a_L_inverse(mean_explosion_time(1.2345)) == doctest::Approx(1.2345).epsilon(1e-5));
    for (double a : {0.8, 1.2, 1.9, 2.6, 3.0})
        CHECK(a_L_inverse(mean_explosion_time(a)) == doctest::Approx(a).epsilon(2e-6));
    CHECK_THROWS_AS(a_L_inverse(1.0), std::domain_error); // below m at the lower bracket
}

TEST_CASE("a_L asymptotic expansion") {
    // leading factor collapses to 1 at L = e^{8/3}
    const double L0 = std::exp(8.0 / 3.0);
    const double expect0 = 1.0 + (2.0 / 9.0) * std::log(8.0 / 3.0) / (8.0 / 3.0) +
                           (-(2.0 / 3.0) * std::log(kPi) + (2.0 / 9.0) * std::log(0.375)) / (8.0 / 3.0);
    CHECK(a_L_asymptotic(L0) == doctest::Approx(expect0).epsilon(1e-12));
    // direct evaluation at L = 1e6 (leading term 2.994094, full value frozen)
    CHECK(std::pow(0.375 * std::log(1e6), 2.0 / 3.0) == doctest::Approx(2.9940944).epsilon(1e-6));
    CHECK(a_L_asymptotic(1e6) == doctest::Approx(2.9079269).epsilon(1e-6));
    CHECK_THROWS_AS(a_L_asymptotic(2.0), std::domain_error);
    // cross-checks against the exact inverse
    CHECK(std::abs(a_L_inverse(1e4) - a_L_asymptotic(1e4)) / a_L_inverse(1e4) < 0.05);
    CHECK(std::abs(a_L_inverse(1e5) - a_L_asymptotic(1e5)) / a_L_inverse(1e5) < 0.05);
}

TEST_CASE("eigenvalue rescaling is the affine map 4 sqrt(a_L)(lambda + a_L)") {
    ScalingParams p = ScalingParams::from_beta(0.1);
    const double root = std::sqrt(p.a_L);
    CHECK(rescale_eigenvalue(-p.a_L, p) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(rescale_eigenvalue(-p.a_L + 1.0 / (4.0 * root), p) == doctest::Approx(1.0).epsilon(1e-10));
    const double r = 2.5;
    CHECK(rescale_eigenvalue(-p.a_L - r / (4.0 * root), p) == doctest::Approx(-r).epsilon(1e-10));
    // affine: f(x + y d) - f(x) = 4 sqrt(a_L) y d
    const double x = -0.3, y = 1.7, d = 0.01;
    CHECK(rescale_eigenvalue(x + y * d, p) - rescale_eigenvalue(x, p) ==
          doctest::Approx(4.0 * root * y * d).epsilon(1e-10));
}

TEST_CASE("convention conversion and its inverse") {
    ScalingParams p;
    p.beta = 0.1;
    CHECK(convert_conventions(0.0, 3.0, p).lambda == 0.0);
    ScalingParams p4;
    p4.beta = 4.0; // (beta/4) = 1: identity map
    auto c4 = convert_conventions(2.5, 1.5, p4);
    CHECK(c4.lambda == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(c4.phi_time == doctest::Approx(1.5).epsilon(1e-14));
    // round trip
    auto c = convert_conventions(-1.3, 0.8, p);
    auto back = invert_conventions(c.lambda, c.phi_time, p);
    CHECK(back.lambda == doctest::Approx(-1.3).epsilon(1e-12));
    CHECK(back.phi_time == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("scaling params from beta") {
    ScalingParams p = ScalingParams::from_beta(0.1);
    CHECK(p.L == doctest::Approx(length_scale(0.1)).epsilon(1e-12));
    CHECK_FALSE(p.a_L_from_asymptotic);
    CHECK(mean_explosion_time(p.a_L) == doctest::Approx(p.L).epsilon(1e-5));
    CHECK(p.c_beta ==
          doctest::Approx(std::pow(15.0 * std::log(1.0 / (kPi * 0.1)), 2.0 / 3.0)).epsilon(1e-12));
    CHECK_THROWS_AS(ScalingParams::from_beta(0.4), std::domain_error);
    // L(0.2) sits below m(0+): the asymptotic fallback kicks in
    ScalingParams q = ScalingParams::from_beta(0.2);
    CHECK(q.a_L_from_asymptotic);
    CHECK(q.a_L > 0.0);
}
