#pragma once

#include <cstddef>
#include <vector>

#include "sao/riccati.hpp"

namespace sao {

// Dirichlet problem for -d^2 + (beta/4) x + xi on [0, T], solved through the
// explosion-counting representation: #{eigenvalues <= -a} equals the number
// of explosions of Z_a started from +infinity.

std::size_t eigenvalue_count(const BrownianPath& path, double beta, double T, double a,
                             std::size_t stop_after = static_cast<std::size_t>(-1));

struct BisectResult {
    double lambda = 0.0;
    // Estimate biased to the side where the count equals k, i.e. where the
    // k-th barrier crossing is materialized (what reconstruction wants).
    double lambda_inside = 0.0;
    bool tie_warning = false; // counts jumped by >= 2 across tol
    int count_evaluations = 0;
};

BisectResult eigenvalue_bisect(const BrownianPath& path, double beta, double T, std::size_t k,
                               double tol, double a_guess = 0.0);

struct Eigenfunction {
    double lambda = 0.0;
    std::vector<double> times;
    std::vector<double> values; // L2-normalized (trapezoid)
    double center = 0.0;        // first argmax of |phi|
    double stitch_time = 0.0;   // crossing center used to join the two halves
    double stitch_mismatch = 0.0;
};

// Joins the forward diffusion Z_{-lambda} (trusted on [0, stitch]) with the
// backward one (trusted on [stitch, T]); integrates chi = phi'/phi in log
// space with sign flips at the explosion times.
Eigenfunction reconstruct_eigenfunction(const BrownianPath& path, double beta, double T,
                                        double lambda_k, double tol = 1e-3);

double localization_center(const std::vector<double>& times, const std::vector<double>& values);
inline double localization_center(const Eigenfunction& phi) {
    return localization_center(phi.times, phi.values);
}

struct ShapeProfiles {
    std::vector<double> xs;
    std::vector<double> h; // sqrt2 a_L^{-1/4} phi(U + x/sqrt a_L)
    std::vector<double> b; // (B(U + x/sqrt a_L) - B(U))/sqrt a_L
    double h_sup_dist = 0.0; // sup |h - 1/cosh|
    double b_sup_dist = 0.0; // sup |b + 2 tanh|
};

ShapeProfiles shape_profiles(const Eigenfunction& phi, const BrownianPath& path, double U_k,
                             double a_L, double x_max = 6.0, std::size_t n_points = 241);

struct CrossingEvent {
    double iota = 0.0;    // last hit of +sqrt(a_L) before theta
    double upsilon = 0.0; // last zero before theta (crossing center)
    double theta = 0.0;   // first hit of -sqrt(a_L)
    double zeta = 0.0;    // following explosion time; NaN when absent
    double tanh_sup_dist = 0.0;
};

// First barrier crossing of the trajectory, with the sup-distance of Z on
// [iota, theta] to sqrt(a_L) tanh(-sqrt(a_L)(t - upsilon)).
CrossingEvent extract_crossing(const RiccatiTrajectory& traj, double a_L);

struct SpectralResult {
    std::vector<double> lambdas;
    std::vector<Eigenfunction> eigenfunctions;
    std::vector<double> centers;
    std::vector<RiccatiTrajectory> chis; // forward Riccati logs Z_{-lambda_k}
    // m_k as densities L phi_k^2(x L) on the rescaled axis x = t / L
    std::vector<std::vector<std::pair<double, double>>> measures;
};

// length_scale = 0 keeps the measures on the unrescaled axis (L = T).
SpectralResult solve_spectrum(const BrownianPath& path, double beta, double T, std::size_t k_max,
                              double tol, bool with_eigenfunctions = true,
                              double length_scale = 0.0);

// m_k as the density L phi^2(x L) on the rescaled axis x = t / L.
std::vector<std::pair<double, double>> measure_density(const Eigenfunction& phi, double L);

} // namespace sao
