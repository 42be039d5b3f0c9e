#pragma once

#include <cstddef>
#include <vector>

#include "sao/brownian_path.hpp"

namespace sao {

// Symmetric tridiagonal matrix; shared by the finite-difference oracle and
// the beta-ensemble sampler.
struct SymTridiagonal {
    std::vector<double> diag;
    std::vector<double> off; // size diag.size() - 1

    std::size_t n() const { return diag.size(); }
};

// Finite-difference Dirichlet discretization of -d^2/dx^2 + (beta/4) x + xi
// on [0, T], interior nodes t_i = i T/(n+1). The white noise is realized as
// cell-averaged increments of the shared Brownian path.
struct TridiagonalOperator {
    std::size_t n = 0;
    double dx = 0.0;
    SymTridiagonal mat;
};

TridiagonalOperator build_operator(const BrownianPath& path, double beta, double T, std::size_t n);

// Number of eigenvalues <= -a (Sturm sequence / LDL^T pivot count).
std::size_t sturm_count(const SymTridiagonal& m, double a);
inline std::size_t sturm_count(const TridiagonalOperator& op, double a) {
    return sturm_count(op.mat, a);
}

// Number of eigenvalues strictly below sigma.
std::size_t count_below(const SymTridiagonal& m, double sigma);

// Smallest k_max eigenvalues by Sturm bisection, each within tol.
std::vector<double> eigenvalues(const SymTridiagonal& m, std::size_t k_max, double tol);
inline std::vector<double> eigenvalues(const TridiagonalOperator& op, std::size_t k_max, double tol) {
    return eigenvalues(op.mat, k_max, tol);
}

// k-th largest eigenvalues (decreasing), for the ensemble edge.
std::vector<double> top_eigenvalues(const SymTridiagonal& m, std::size_t k_max, double tol);

// Inverse iteration with shift lambda; normalized, first nonzero component
// positive. Throws after 100 iterations without convergence.
std::vector<double> eigenvector(const SymTridiagonal& m, double lambda, double tol);
inline std::vector<double> eigenvector(const TridiagonalOperator& op, double lambda, double tol) {
    return eigenvector(op.mat, lambda, tol);
}

} // namespace sao
