#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace sao {

inline constexpr const char* kToolVersion = "sao 1.0.0";
inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind {
    Spectrum,
    Explosions,
    McKean,
    Poisson,
    Shape,
    EnsembleEdge,
    OuExit,
    SelfTest,
};

ExperimentKind parse_kind(const std::string& name);
std::string kind_name(ExperimentKind kind);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::SelfTest;
    double beta = 0.0;
    double a = 1.5;
    double T = 0.0; // 0 = kind-specific default
    std::size_t replicas = 100;
    int n = 8;             // cells (poisson), matrix size (ensemble-edge)
    double epsilon = 0.0;  // eigenvalue-grid half-width parameter
    double dt = 1e-3;
    double tol = 1e-4;
    std::uint64_t seed = 1;
    std::string out;
    int workers = 0; // 0 = hardware concurrency
    std::size_t k_max = 1;
    std::size_t draws = 10000; // ensemble draws (ensemble-edge)

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct ReplicaRecord {
    std::uint64_t replica_id = 0;
    std::uint64_t seed = 0;
    std::map<std::string, double> scalars;
    std::map<std::string, std::vector<double>> arrays;
    std::string error;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ReplicaRecord> replicas;
    std::map<std::string, double> summary;
    std::map<std::string, bool> verdicts;
    double wall_time_s = 0.0;
    std::string version = kToolVersion;
    int schema_version = kSchemaVersion;

    bool passed() const;
    // include_volatile=false drops wall time (the reproducible payload).
    nlohmann::json to_json(bool include_volatile = true) const;
};

ExperimentReport run(const ExperimentConfig& config);

// JSON document plus CSV sidecars (one per bulk array, header row, one row
// per replica). Round-trips through load().
void persist(const ExperimentReport& report, const std::string& path);
ExperimentReport load(const std::string& path);

// Fixed-width verdict/statistics table.
std::string report_summary(const ExperimentReport& report);

} // namespace sao
