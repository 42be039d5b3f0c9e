#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sao/experiment.hpp"

namespace {

struct CliFlags {
    std::string config_file;
    double beta = -1.0, a = -1e300, T = -1.0, epsilon = -1.0, dt = -1.0, tol = -1.0;
    long long replicas = -1, n = -1, workers = -1, k_max = -1, draws = -1;
    long long seed = -1;
    std::string out;
};

void add_common(CLI::App* sub, CliFlags& f) {
    sub->add_option("--config", f.config_file, "JSON config file; flags override its fields");
    sub->add_option("--beta", f.beta, "inverse temperature");
    sub->add_option("--a", f.a, "spectral parameter a");
    sub->add_option("--T", f.T, "horizon (0 = kind default)");
    sub->add_option("--replicas", f.replicas, "Monte Carlo replicas");
    sub->add_option("--n", f.n, "cells / matrix size (kind-specific)");
    sub->add_option("--epsilon", f.epsilon, "eigenvalue grid half-width parameter");
    sub->add_option("--dt", f.dt, "integration step");
    sub->add_option("--tol", f.tol, "tolerance");
    sub->add_option("--seed", f.seed, "base seed");
    sub->add_option("--out", f.out, "output report path (JSON + CSV sidecars)");
    sub->add_option("--workers", f.workers, "worker threads (0 = hardware)");
    sub->add_option("--k-max", f.k_max, "number of eigenvalues");
    sub->add_option("--draws", f.draws, "ensemble draws (ensemble-edge)");
}

sao::ExperimentConfig build_config(const std::string& kind, const CliFlags& f) {
    nlohmann::json j;
    if (!f.config_file.empty()) {
        std::ifstream in(f.config_file);
        if (!in) throw CLI::ValidationError("--config", "cannot open " + f.config_file);
        j = nlohmann::json::parse(in);
    }
    j["kind"] = kind;
    if (f.beta >= 0.0) j["beta"] = f.beta;
    if (f.a > -1e299) j["a"] = f.a;
    if (f.T >= 0.0) j["T"] = f.T;
    if (f.replicas >= 0) j["replicas"] = f.replicas;
    if (f.n >= 0) j["n"] = f.n;
    if (f.epsilon >= 0.0) j["epsilon"] = f.epsilon;
    if (f.dt >= 0.0) j["dt"] = f.dt;
    if (f.tol >= 0.0) j["tol"] = f.tol;
    if (f.seed >= 0) j["seed"] = f.seed;
    if (!f.out.empty()) j["out"] = f.out;
    if (f.workers >= 0) j["workers"] = f.workers;
    if (f.k_max >= 0) j["k_max"] = f.k_max;
    if (f.draws >= 0) j["draws"] = f.draws;
    return sao::ExperimentConfig::from_json(j);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic Airy operator toolkit"};
    app.require_subcommand(1);

    const char* kinds[] = {"spectrum", "explosions", "mckean",      "poisson",
                           "shape",    "ensemble-edge", "ou-exit", "selftest"};
    const char* help[] = {
        "eigenvalues by Riccati bisection; Gumbel verdict for lambda_1",
        "explosion times of Z_a / X_a over a horizon",
        "McKean exponential law for the first explosion time",
        "Poisson interval-count test for the explosion process",
        "microscopic eigenfunction and environment profiles",
        "beta-ensemble edge vs SAO lambda_1 cross-validation",
        "Ornstein-Uhlenbeck exit-time transform: series vs Monte Carlo",
        "deterministic oracles and reproducibility checks",
    };

    CliFlags flags;
    std::string chosen;
    for (int i = 0; i < 8; ++i) {
        CLI::App* sub = app.add_subcommand(kinds[i], help[i]);
        add_common(sub, flags);
        sub->callback([&chosen, name = std::string(kinds[i])]() { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2; // usage error
    }

    try {
        sao::ExperimentConfig cfg = build_config(chosen, flags);
        if (chosen == "ou-exit" && cfg.replicas < 10000) cfg.replicas = 20000;
        sao::ExperimentReport report = sao::run(cfg);
        if (!cfg.out.empty()) {
            sao::persist(report, cfg.out);
            std::cout << "report written to " << cfg.out << "\n";
        }
        std::cout << sao::report_summary(report);
        return report.passed() ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
