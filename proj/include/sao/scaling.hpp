#pragma once

#include <cstddef>

namespace sao {

struct QuadratureConfig {
    std::size_t nodes = 512; // per 1-d integral; >= 256
    double stabilization_rtol = 1e-8;
};

// L(beta) = 1 / (beta (3/8 ln 1/beta)^{1/3}); admissible beta in (0, 0.3].
double length_scale(double beta);

// m(a) = E[gamma_a]: mean first-passage time from +inf to -inf of the
// time-homogeneous diffusion with drift a - x^2 (potential x^3/3 - a x),
// by quadrature of the classical double integral. Satisfies
// m(a) ~ (pi/sqrt a) exp(8/3 a^{3/2}) for large a.
double mean_explosion_time(double a, const QuadratureConfig& cfg = {});

struct InverseBracket {
    double a_lo = 0.01;
    double a_hi = 40.0;
    int max_iter = 200;
};

// a_L with m(a_L) = L to relative tolerance 1e-6 (bracketing bisection).
double a_L_inverse(double L, const QuadratureConfig& cfg = {}, const InverseBracket& bracket = {});

// All displayed terms of the large-L expansion of a_L.
double a_L_asymptotic(double L);

struct ScalingParams {
    double beta = 0.0;
    double L = 0.0;
    double a_L = 0.0;
    double c_beta = 0.0;
    // a_L came from the displayed expansion because L < m(0+), which happens
    // for beta above roughly 0.18.
    bool a_L_from_asymptotic = false;

    // Derives every scale from beta; rejects beta outside (0, 0.3].
    static ScalingParams from_beta(double beta, const QuadratureConfig& cfg = {});
};

// 4 sqrt(a_L) (lambda + a_L).
double rescale_eigenvalue(double lambda, const ScalingParams& params);

// Conversion between the two operator conventions:
// lambda = (beta/4)^{2/3} mu, and a time coordinate x of the A-convention
// corresponds to x (beta/4)^{-1/3} in the L-convention.
struct ConvertedPoint {
    double lambda = 0.0;
    double phi_time = 0.0;
};
ConvertedPoint convert_conventions(double mu, double psi_time, const ScalingParams& params);
// Inverse map: (lambda, phi_time) -> (mu, psi_time).
ConvertedPoint invert_conventions(double lambda, double phi_time, const ScalingParams& params);

} // namespace sao
