#include "sao/beta_hermite.hpp"

#include <cmath>
#include <stdexcept>

#include "sao/rng.hpp"

namespace sao {

SymTridiagonal sample_tridiagonal(std::size_t N, double beta, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("sample_tridiagonal: N must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("sample_tridiagonal: beta must be > 0");
    SymTridiagonal m;
    m.diag.resize(N);
    m.off.resize(N - 1);
    Rng rng(seed);
    const double diag_sd = std::sqrt(2.0 / beta);
    for (std::size_t i = 0; i < N; ++i) m.diag[i] = diag_sd * rng.normal();
    for (std::size_t i = 0; i < N - 1; ++i)
        m.off[i] = rng.chi(beta * static_cast<double>(N - 1 - i)) / std::sqrt(beta);
    return m;
}

std::vector<double> edge_rescale(const std::vector<double>& mu_decreasing, std::size_t N,
                                 std::size_t k_max) {
    if (k_max > mu_decreasing.size())
        throw std::invalid_argument("edge_rescale: k_max exceeds spectrum size");
    const double scale = std::pow(static_cast<double>(N), 1.0 / 6.0);
    const double edge = 2.0 * std::sqrt(static_cast<double>(N));
    std::vector<double> out(k_max);
    for (std::size_t i = 0; i < k_max; ++i) out[i] = scale * (edge - mu_decreasing[i]);
    return out;
}

EnsembleSample sample_ensemble_edge(std::size_t N, double beta, std::uint64_t seed,
                                    std::size_t k_max, double tol) {
    EnsembleSample s;
    s.N = N;
    s.beta = beta;
    SymTridiagonal m = sample_tridiagonal(N, beta, seed);
    s.mu = top_eigenvalues(m, k_max, tol);
    s.edge_rescaled = edge_rescale(s.mu, N, k_max);
    return s;
}

} // namespace sao
