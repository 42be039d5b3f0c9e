#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "sao/brownian_path.hpp"

namespace sao {

inline constexpr double kPlusInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();

// Drift a + (beta/4) t - z^2. beta = 0 gives the time-homogeneous family.
struct DriftSpec {
    double a = 0.0;
    double beta = 0.0;
    bool time_reversed = false;

    double level(double t) const { return a + 0.25 * beta * t; }
    // Bottom of the time-inhomogeneous well, sqrt(a + beta t / 4).
    double well_bottom(double t) const;
};

enum class Direction { Forward, Backward };

struct RiccatiTrajectory {
    Direction direction = Direction::Forward;
    double a = 0.0;
    double beta = 0.0;
    double t_start = 0.0; // t0 (forward) / t_end (backward)
    double t_stop = 0.0;  // t1 (forward) / t0   (backward)
    double x_start = kPlusInfinity;

    // Sparse record of (t, Z(t)), increasing in t for both directions.
    std::vector<double> times;
    std::vector<double> values;

    // Explosion times, strictly increasing. Forward: hits of -inf.
    // Backward: hits of +inf (the ordinary clock times).
    std::vector<double> explosions;

    // Z at the far end of the integration (t1 forward, t0 backward).
    double terminal_value = 0.0;

    // Certificate payload for hat_Z_canonical: sup discrepancy under
    // horizon doubling; negative when no certificate was requested.
    double certificate = -1.0;

    std::size_t explosion_count(double t_lo, double t_hi) const;
    // Linear-interpolated sample lookup.
    double value_at(double t) const;
};

enum class ChartPolicy { Auto, ForceZ, ForceW };

struct IntegratorOptions {
    double tol = 0.0;           // explosion-time tolerance; 0 = 1e-6*(t1-t0)
    std::size_t sample_stride = 1; // 0 = record no samples
    int max_refine_depth = 18;
    std::size_t max_explosions = static_cast<std::size_t>(-1); // early stop
    // Splits every path cell into 2^substep_depth steps through the bridge
    // cache, so different resolutions share one environment.
    int substep_depth = 0;
    ChartPolicy chart = ChartPolicy::Auto;
};

// Forward diffusion dZ = (a + beta t/4 - Z^2) dt + dB on [t0, t1], started
// at x0 (may be +inf). Explosions to -inf restart from +inf.
RiccatiTrajectory integrate_forward(const BrownianPath& path, const DriftSpec& drift,
                                    double t0, double x0, double t1,
                                    const IntegratorOptions& opts = {});

// Backward diffusion ending at x_end (may be -inf) at time t_end, solved on
// [t0, t_end] against the time-reversed increments of the same path.
RiccatiTrajectory integrate_backward(const BrownianPath& path, const DriftSpec& drift,
                                     double t_end, double x_end, double t0,
                                     const IntegratorOptions& opts = {});

// Approximation of the unique solution with Z(+inf) = -inf, integrated
// backward from horizon_T with terminal value -well_bottom(horizon_T).
// Emits a convergence certificate: doubling the horizon moves the solution
// on [0, horizon_T/2] by less than tol (else throws).
RiccatiTrajectory hat_Z_canonical(const BrownianPath& path, double a, double beta,
                                  double horizon_T, double tol,
                                  const IntegratorOptions& opts = {});

// All parameters of the strictly increasing grid integrated against the
// identical environment; one shared refinement cache.
std::vector<RiccatiTrajectory> coupled_sweep(const BrownianPath& path,
                                             const std::vector<double>& a_grid, double beta,
                                             double t0, double t1,
                                             const IntegratorOptions& opts = {});

std::size_t explosion_count(const RiccatiTrajectory& traj, double t_lo, double t_hi);

} // namespace sao
