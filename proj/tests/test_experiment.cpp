#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "sao/experiment.hpp"

using namespace sao;

namespace {

ExperimentConfig small_explosions_config() {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Explosions;
    cfg.a = 0.5;
    cfg.beta = 0.0;
    cfg.T = 30.0;
    cfg.replicas = 6;
    cfg.dt = 1e-3;
    cfg.tol = 1e-5;
    cfg.seed = 20260101;
    cfg.workers = 2;
    return cfg;
}

std::size_t line_count(const std::string& file) {
    std::ifstream f(file);
    REQUIRE(f.good());
    std::size_t n = 0;
    std::string line;
    while (std::getline(f, line)) ++n;
    return n;
}

} // namespace

TEST_CASE("kind names round-trip and bad kinds are usage errors") {
    for (const char* k : {"spectrum", "explosions", "mckean", "poisson", "shape", "ensemble-edge",
                          "ou-exit", "selftest"})
        CHECK(kind_name(parse_kind(k)) == k);
    CHECK_THROWS_AS(parse_kind("bogus"), std::invalid_argument);
    nlohmann::json j;
    j["kind"] = "mckean";
    j["replicas"] = 0;
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), std::invalid_argument);
}

TEST_CASE("config json round trip with flag-style overrides") {
    nlohmann::json j;
    j["kind"] = "poisson";
    j["a"] = 1.25;
    j["replicas"] = 321;
    j["n"] = 12;
    auto cfg = ExperimentConfig::from_json(j);
    CHECK(cfg.kind == ExperimentKind::Poisson);
    CHECK(cfg.a == 1.25);
    CHECK(cfg.replicas == 321);
    CHECK(cfg.n == 12);
    auto j2 = cfg.to_json();
    CHECK(j2["a"] == 1.25);
    CHECK(j2["kind"] == "poisson");
}

TEST_CASE("selftest: deterministic oracles and worker independence") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::SelfTest;
    cfg.seed = 99;
    ExperimentReport rep = run(cfg);
    for (const auto& [name, ok] : rep.verdicts) {
        INFO(name);
        CHECK(ok);
    }
    CHECK(rep.passed());
}

TEST_CASE("fixed seed reproduces replica records byte for byte") {
    ExperimentConfig cfg = small_explosions_config();
    cfg.replicas = 1;
    ExperimentReport r1 = run(cfg);
    ExperimentReport r2 = run(cfg);
    CHECK(r1.to_json(false).dump() == r2.to_json(false).dump());
    REQUIRE(r1.replicas.size() == 1);
    CHECK(r1.replicas[0].arrays.at("explosions") == r2.replicas[0].arrays.at("explosions"));
}

TEST_CASE("persist and load round-trip the numeric payload") {
    ExperimentConfig cfg = small_explosions_config();
    cfg.out = "exp_report.json";
    ExperimentReport rep = run(cfg);
    persist(rep, cfg.out);
    ExperimentReport back = load(cfg.out);
    CHECK(back.to_json(false).dump() == rep.to_json(false).dump());
    for (std::size_t i = 0; i < rep.replicas.size(); ++i) {
        const auto& a = rep.replicas[i].arrays;
        const auto& b = back.replicas[i].arrays;
        if (a.count("explosions")) {
            REQUIRE(b.count("explosions"));
            CHECK(a.at("explosions") == b.at("explosions"));
        }
    }
    // sidecar: header row plus one row per replica
    CHECK(line_count("exp_report_explosions.csv") == rep.replicas.size() + 1);
    // schema version travels with the document
    CHECK(back.schema_version == kSchemaVersion);
    CHECK(back.version == std::string(kToolVersion));
}

TEST_CASE("mckean pipeline produces the verdict schema") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::McKean;
    cfg.a = 1.0; // the exponential law needs the well deep enough
    cfg.beta = 0.0;
    cfg.replicas = 350;
    cfg.dt = 2e-3;
    cfg.tol = 1e-4;
    cfg.seed = 7;
    cfg.workers = 2;
    cfg.out = "mckean_report.json";
    ExperimentReport rep = run(cfg);
    CHECK(rep.summary.count("m_a") == 1);
    CHECK(rep.summary.count("ks_d") == 1);
    CHECK(rep.summary.count("ks_p") == 1);
    CHECK(rep.verdicts.count("ks_exponential") == 1);
    CHECK(rep.verdicts.count("mean_within_3_stderr") == 1);
    CHECK(rep.passed());
    persist(rep, cfg.out);
    // ECDF overlay columns for plotting
    std::ifstream f("mckean_report_ecdf.csv");
    REQUIRE(f.good());
    std::string header;
    std::getline(f, header);
    CHECK(header == "x,ecdf,exp1_cdf");
    // summary table contains the key rows
    const std::string table = report_summary(rep);
    CHECK(table.find("m_a") != std::string::npos);
    CHECK(table.find("ks_p") != std::string::npos);
    CHECK(table.find("verdict ks_exponential") != std::string::npos);
}

TEST_CASE("explosions kind materializes the eigenvalue grid when asked") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Explosions;
    cfg.beta = 0.1;
    cfg.epsilon = 0.5;
    cfg.replicas = 3;
    cfg.dt = 1e-3;
    cfg.tol = 1e-4;
    cfg.seed = 13;
    cfg.workers = 2;
    ExperimentReport rep = run(cfg);
    for (const auto& r : rep.replicas) {
        REQUIRE(r.error.empty());
        REQUIRE(r.arrays.count("grid_counts") == 1);
        const auto& counts = r.arrays.at("grid_counts");
        CHECK(counts.size() == 9); // p in [-4, 4] at epsilon = 0.5
        for (std::size_t i = 1; i < counts.size(); ++i) CHECK(counts[i] <= counts[i - 1]);
    }
}

TEST_CASE("mckean rejects nonzero beta") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::McKean;
    cfg.beta = 0.1;
    CHECK_THROWS_AS(run(cfg), std::invalid_argument);
}

TEST_CASE("report summary of an empty report is header-only") {
    ExperimentReport rep;
    const std::string table = report_summary(rep);
    CHECK(table.find("experiment:") != std::string::npos);
    CHECK(table.find("replicas") != std::string::npos);
}
