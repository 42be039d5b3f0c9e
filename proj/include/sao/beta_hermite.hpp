#pragma once

#include <cstdint>
#include <vector>

#include "sao/tridiag.hpp"

namespace sao {

// Tridiagonal model of the Gaussian beta-ensemble, normalized so the joint
// eigenvalue density is prod |mu_i - mu_j|^beta exp(-beta/4 sum mu_i^2):
// diagonal N(0, 2/beta), off-diagonal chi_{beta (N-i)} / sqrt(beta).
SymTridiagonal sample_tridiagonal(std::size_t N, double beta, std::uint64_t seed);

struct EnsembleSample {
    std::size_t N = 0;
    double beta = 0.0;
    std::vector<double> mu;            // decreasing, top k_max
    std::vector<double> edge_rescaled; // N^{1/6} (2 sqrt(N) - mu_i)
};

// N^{1/6}(2 sqrt N - mu_i) for the top k_max of a decreasing spectrum.
std::vector<double> edge_rescale(const std::vector<double>& mu_decreasing, std::size_t N,
                                 std::size_t k_max);

// Samples the ensemble and extracts the top k_max eigenvalues.
EnsembleSample sample_ensemble_edge(std::size_t N, double beta, std::uint64_t seed,
                                    std::size_t k_max, double tol = 1e-10);

} // namespace sao
