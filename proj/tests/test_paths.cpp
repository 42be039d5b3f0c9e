#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sao/brownian_path.hpp"
#include "sao/stats.hpp"

using namespace sao;

TEST_CASE("same seed reproduces the same path") {
    BrownianPath p1 = BrownianPath::generate(0.0, 2.0, 1e-3, 42);
    BrownianPath p2 = BrownianPath::generate(0.0, 2.0, 1e-3, 42);
    for (std::size_t i = 0; i <= p1.cells(); i += 37) CHECK(p1.node(i) == p2.node(i));
    BrownianPath p3 = BrownianPath::generate(0.0, 2.0, 1e-3, 43);
    CHECK(p1.node(1000) != p3.node(1000));
}

TEST_CASE("refinement keeps existing values bit-identical") {
    BrownianPath p = BrownianPath::generate(0.0, 1.0, 1e-2, 7);
    std::vector<double> before;
    for (std::size_t i = 0; i <= p.cells(); ++i) before.push_back(p.node(i));
    p.refine(0.0, 1.0, 1e-2 / 8.0);
    for (std::size_t i = 0; i <= p.cells(); ++i) CHECK(p.node(i) == before[i]);
}

TEST_CASE("refinement is idempotent and order-independent") {
    BrownianPath p = BrownianPath::generate(0.0, 2.0, 1e-2, 11);
    BrownianPath q = BrownianPath::generate(0.0, 2.0, 1e-2, 11);
    p.refine(0.0, 1.0, 1e-2 / 4.0);
    p.refine(1.0, 2.0, 1e-2 / 4.0);
    p.refine(0.0, 1.0, 1e-2 / 4.0); // repeat
    q.refine(0.0, 2.0, 1e-2 / 4.0);
    for (int d = 0; d <= 2; ++d) {
        for (double t = 0.0; t <= 2.0; t += 1e-2 / 4.0) {
            CHECK(p.value(t, 8) == q.value(t, 8));
        }
    }
}

TEST_CASE("refine rejects non-dyadic steps") {
    BrownianPath p = BrownianPath::generate(0.0, 1.0, 1e-2, 3);
    CHECK_THROWS_AS(p.refine(0.0, 1.0, 1e-2 / 3.0), std::invalid_argument);
}

TEST_CASE("increments are additive and telescoping") {
    BrownianPath p = BrownianPath::generate(0.0, 1.0, 1e-3, 5);
    CHECK(p.increment(0.25, 0.25) == 0.0);
    const double su = p.increment(0.1, 0.9);
    const double st = p.increment(0.1, 0.5) + p.increment(0.5, 0.9);
    CHECK(su == doctest::Approx(st).epsilon(1e-12));
    CHECK(p.increment(0.0, 1.0) == doctest::Approx(p.node(p.cells())).epsilon(1e-12));
    CHECK_THROWS_AS(p.increment(0.1 + 1e-7, 0.2), std::invalid_argument);
}

TEST_CASE("bridge midpoints have variance dt/4") {
    const double dt = 1e-2;
    BrownianPath p = BrownianPath::generate(0.0, 100.0, dt, 17);
    std::vector<double> devs;
    for (std::size_t i = 0; i < 10000; ++i) {
        const double lo = static_cast<double>(i) * dt;
        const double mid = lo + 0.5 * dt;
        devs.push_back(p.value(mid, 1) - 0.5 * (p.node(i) + p.node(i + 1)));
    }
    const double var = sample_variance(devs);
    CHECK(var > 0.9 * dt / 4.0);
    CHECK(var < 1.1 * dt / 4.0);
}

TEST_CASE("increments over cells are Gaussian with variance dt") {
    const double dt = 1e-3;
    BrownianPath p = BrownianPath::generate(0.0, 10.0, dt, 23);
    std::vector<double> incs;
    for (std::size_t i = 0; i < 10000; ++i) incs.push_back(p.cell_increment(i) / std::sqrt(dt));
    const double var = sample_variance(incs);
    CHECK(var > 0.9);
    CHECK(var < 1.1);
    KsResult ks = ks_statistic(incs, NamedCdf::Normal01);
    CHECK(ks.p_value > 0.001);
}

TEST_CASE("mean of B(t1) over many seeds obeys the CLT bound") {
    const double t1 = 4.0;
    double acc = 0.0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) {
        BrownianPath p = BrownianPath::generate(0.0, t1, 0.5, static_cast<std::uint64_t>(s));
        acc += p.node(p.cells());
    }
    CHECK(std::abs(acc / n) <= 4.0 * std::sqrt(t1) / 100.0);
}

TEST_CASE("memory cap rejects oversized grids") {
    CHECK_THROWS_AS(BrownianPath::generate(0.0, 1.0, 1e-9, 1), std::length_error);
}

TEST_CASE("dump/load round-trips through the seed") {
    BrownianPath p = BrownianPath::generate(0.5, 2.5, 1e-2, 99);
    p.dump("path_meta.bin");
    BrownianPath q = BrownianPath::load("path_meta.bin");
    CHECK(q.seed() == p.seed());
    CHECK(q.dt() == p.dt());
    for (std::size_t i = 0; i <= p.cells(); i += 11) CHECK(p.node(i) == q.node(i));
}

TEST_CASE("zero path is identically zero") {
    BrownianPath p = BrownianPath::zero(0.0, 1.0, 1e-2);
    CHECK(p.node(50) == 0.0);
    CHECK(p.value(0.505, 4) == 0.0);
}
