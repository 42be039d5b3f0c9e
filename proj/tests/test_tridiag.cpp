#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sao/spectrum.hpp"
#include "sao/stats.hpp"
#include "sao/tridiag.hpp"

using namespace sao;
namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("zero noise reduces to the classical Laplacian matrix") {
    BrownianPath z = BrownianPath::zero(0.0, 1.0, 1e-4);
    auto op = build_operator(z, 0.0, 1.0, 99);
    const double inv_dx2 = 1.0 / (op.dx * op.dx);
    for (double d : op.mat.diag) CHECK(d == doctest::Approx(2.0 * inv_dx2).epsilon(1e-14));
    for (double o : op.mat.off) CHECK(o == doctest::Approx(-inv_dx2).epsilon(1e-14));
    CHECK_THROWS_AS(build_operator(z, 0.0, 1.0, 4), std::invalid_argument);
}

TEST_CASE("operator entries are deterministic in (seed, n)") {
    BrownianPath p1 = BrownianPath::generate(0.0, 5.0, 1e-3, 42);
    BrownianPath p2 = BrownianPath::generate(0.0, 5.0, 1e-3, 42);
    auto a = build_operator(p1, 0.1, 5.0, 500);
    auto b = build_operator(p2, 0.1, 5.0, 500);
    for (std::size_t i = 0; i < a.mat.diag.size(); ++i) CHECK(a.mat.diag[i] == b.mat.diag[i]);
}

TEST_CASE("noise column variance follows the white-noise window scaling") {
    BrownianPath p = BrownianPath::generate(0.0, 10.0, 1e-3, 4711);
    auto op = build_operator(p, 0.0, 10.0, 4999);
    const double inv_dx2 = 1.0 / (op.dx * op.dx);
    std::vector<double> noise(op.n);
    for (std::size_t i = 0; i < op.n; ++i) noise[i] = op.mat.diag[i] - 2.0 * inv_dx2;
    // width-2dx averaging window: variance 2dx/(2dx)^2 = 1/(2dx)
    const double var = sample_variance(noise);
    CHECK(var > 0.9 / (2.0 * op.dx));
    CHECK(var < 1.1 / (2.0 * op.dx));
}

TEST_CASE("Sturm counts on the sine spectrum") {
    BrownianPath z = BrownianPath::zero(0.0, 1.0, 1e-4);
    auto op = build_operator(z, 0.0, 1.0, 2000);
    CHECK(sturm_count(op, -50.0) == 2); // k^2 pi^2 <= 50 for k = 1, 2
    CHECK(sturm_count(op, -5.0) == 0);
    CHECK(sturm_count(op, 1e9) == 0);
    // a below -lambda_max: every eigenvalue is counted
    CHECK(sturm_count(op, -5.0 / (op.dx * op.dx)) == op.n);
}

TEST_CASE("Sturm count is zero well above the spectrum on noisy instances") {
    for (int s = 0; s < 5; ++s) {
        BrownianPath p = BrownianPath::generate(0.0, 20.0, 1e-3, 100 + s);
        auto op = build_operator(p, 0.0, 20.0, 2000);
        CHECK(sturm_count(op, 15.0) == 0); // ~ 10 a_L for the desk scale
    }
}

TEST_CASE("smallest eigenvalues converge at second order") {
    BrownianPath z = BrownianPath::zero(0.0, 1.0, 1e-4);
    auto op = build_operator(z, 0.0, 1.0, 4000);
    auto ev = eigenvalues(op, 3, 1e-9);
    for (int k = 1; k <= 3; ++k) {
        const double expect = kPi * kPi * k * k;
        CHECK(std::abs(ev[k - 1] - expect) / expect < 1e-3);
        if (k > 1) CHECK(ev[k - 1] > ev[k - 2]);
    }
    // halving dx reduces the error by about 4x
    auto coarse = build_operator(z, 0.0, 1.0, 499);
    auto fine = build_operator(z, 0.0, 1.0, 999);
    const double e_coarse = std::abs(eigenvalues(coarse, 1, 1e-11)[0] - kPi * kPi);
    const double e_fine = std::abs(eigenvalues(fine, 1, 1e-11)[0] - kPi * kPi);
    CHECK(e_coarse / e_fine > 3.0);
    CHECK(e_coarse / e_fine < 5.0);
}

TEST_CASE("inverse iteration recovers the sine eigenvector") {
    BrownianPath z = BrownianPath::zero(0.0, 1.0, 1e-4);
    auto op = build_operator(z, 0.0, 1.0, 4000);
    auto ev = eigenvalues(op, 2, 1e-10);
    auto v1 = eigenvector(op, ev[0], 1e-6);
    const double scale = std::sqrt(2.0 * op.dx); // discrete L2-normalized sine
    double sup = 0.0;
    for (std::size_t i = 0; i < v1.size(); ++i) {
        const double t = static_cast<double>(i + 1) * op.dx;
        sup = std::max(sup, std::abs(v1[i] - scale * std::sin(kPi * t)));
    }
    CHECK(sup <= 1e-3);
    // residual enforcement, against a modest-scale matrix
    SymTridiagonal small;
    small.diag.assign(512, 2.0);
    small.off.assign(511, -1.0);
    auto evs = eigenvalues(small, 2, 1e-12);
    auto u = eigenvector(small, evs[0], 1e-10);
    double resid = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double r = (small.diag[i] - evs[0]) * u[i];
        if (i > 0) r += small.off[i - 1] * u[i - 1];
        if (i + 1 < u.size()) r += small.off[i] * u[i + 1];
        resid += r * r;
        norm += u[i] * u[i];
    }
    CHECK(std::sqrt(resid) <= 1e-8 * std::sqrt(norm));
    CHECK(u[0] > 0.0); // sign convention
    // orthogonality of the first two eigenvectors
    auto v2 = eigenvector(op, ev[1], 1e-6);
    double dot = 0.0;
    for (std::size_t i = 0; i < v1.size(); ++i) dot += v1[i] * v2[i];
    CHECK(std::abs(dot) <= 1e-6);
}

TEST_CASE("count identity with the Riccati route on shared noise") {
    int match = 0;
    const double T = 10.0;
    for (int s = 0; s < 10; ++s) {
        BrownianPath p = BrownianPath::generate(0.0, T, 1e-3, 9000 + s);
        auto op = build_operator(p, 0.0, T, 9999); // dx = dt
        const double a = -0.8 + 0.2 * s;
        if (sturm_count(op, a) == eigenvalue_count(p, 0.0, T, a)) ++match;
    }
    CHECK(match >= 9);
}
