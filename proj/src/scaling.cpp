#include "sao/scaling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sao/quadrature.hpp"

namespace sao {

double length_scale(double beta) {
    if (!(beta > 0.0) || beta > 0.3)
        throw std::domain_error("length_scale: beta must lie in (0, 0.3]");
    const double inner = std::cbrt(0.375 * std::log(1.0 / beta));
    return 1.0 / (beta * inner);
}

namespace {

// m(a) = 2 int_R e^{2V(y)} int_y^inf e^{-2V(z)} dz dy with V(x) = x^3/3 - ax.
// The inner integral is taken in u = z - y with the exponent
// psi_y(u) = 2(V(y) - V(y+u)) = 2(a u - u^3/3 - u^2 y - u y^2),
// peaked at z = sqrt(a); the outer integrand peaks at y = -sqrt(a) and has
// 1/(2 y^2) tails, which are mapped to [0, 1/Y] via y = 1/s.

struct MeanFptIntegrand {
    double a;
    double sq;    // sqrt(a)
    std::size_t sub;

    // psi_y(u) = 2 (V(y) - V(y+u)), the inner exponent in u = z - y. It has
    // a boundary peak at u = 0 (value 0) and, for y < sqrt(a), an interior
    // peak at z = sqrt(a); the interior one dominates only on
    // y in (-2 sqrt(a), sqrt(a)).
    double psi(double y, double u) const {
        return 2.0 * (a * u - u * u * u / 3.0 - u * u * y - u * y * y);
    }

    double inner(double y) const {
        const double u_star = std::max(0.0, sq - y);
        const double psi_int = u_star > 0.0 ? psi(y, u_star) : 0.0;
        const double psi_max = std::max(0.0, psi_int);
        const double w_int = 0.5 / std::sqrt(std::max(1.0, sq));
        const double w_bdry = std::min(0.25, 0.5 / std::max(1.0, y * y - a));

        double u_hi;
        if (psi_int >= psi_max - 60.0 && u_star > 0.0) {
            double w = w_int;
            u_hi = u_star + w;
            while (psi(y, u_hi) > psi_max - 60.0) u_hi += w, w *= 2.0;
        } else {
            u_hi = w_bdry;
            while (psi(y, u_hi) > psi_max - 60.0) u_hi *= 2.0;
        }

        std::vector<double> edges = clustered_edges(0.0, u_hi, std::min(u_star, u_hi), w_int);
        for (double e : clustered_edges(0.0, u_hi, 0.0, w_bdry)) edges.push_back(e);
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end(),
                                [&](double x, double z) { return z - x < 1e-12 * (1.0 + u_hi); }),
                    edges.end());

        auto f = [&](double u) { return std::exp(psi(y, u) - psi_max); };
        const double val = composite_gauss16(f, edges, sub);
        return std::exp(psi_max) * val; // psi_max <= (8/3) a^{3/2}, in range for a <= 40
    }

    double core(double Y) const {
        auto f = [&](double y) { return inner(y); };
        const double w0 = std::max(1e-2, 0.25 / std::sqrt(std::max(1.0, sq)));
        std::vector<double> edges = clustered_edges(-Y, Y, -sq, w0);
        for (double e : clustered_edges(-Y, Y, sq, w0)) edges.push_back(e);
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end(),
                                [&](double x, double z) { return z - x < 1e-12 * (1.0 + Y); }),
                    edges.end());
        return composite_gauss16(f, edges, sub);
    }

    double tail(double Y, int sign) const {
        auto f = [&](double s) {
            if (s <= 0.0) return 0.0;
            const double y = static_cast<double>(sign) / s;
            return inner(y) / (s * s);
        };
        return composite_gauss16(f, {0.0, 0.25 / Y, 1.0 / Y}, sub);
    }

    double total() const {
        const double Y = sq + 8.0;
        return 2.0 * (core(Y) + tail(Y, +1) + tail(Y, -1));
    }
};

double mean_fpt_once(double a, std::size_t nodes) {
    // `nodes` counts quadrature nodes per 1-d integral; panels are GL-16.
    const std::size_t sub = std::max<std::size_t>(1, nodes / 256);
    MeanFptIntegrand q{a, std::sqrt(a), sub};
    return q.total();
}

} // namespace

double mean_explosion_time(double a, const QuadratureConfig& cfg) {
    if (!(a > 0.0)) throw std::domain_error("mean_explosion_time: a must be > 0");
    if (a > 40.0) throw std::domain_error("mean_explosion_time: a too large for double range");
    if (cfg.nodes < 256) throw std::invalid_argument("mean_explosion_time: nodes must be >= 256");
    const double coarse = mean_fpt_once(a, cfg.nodes);
    const double fine = mean_fpt_once(a, cfg.nodes * 2);
    if (std::abs(fine - coarse) > cfg.stabilization_rtol * std::abs(fine))
        throw std::runtime_error("mean_explosion_time: quadrature did not stabilize under node doubling");
    return fine;
}

double a_L_inverse(double L, const QuadratureConfig& cfg, const InverseBracket& bracket) {
    double lo = bracket.a_lo, hi = bracket.a_hi;
    if (mean_explosion_time(lo, cfg) > L)
        throw std::domain_error("a_L_inverse: L below m(a) at the lower bracket");
    if (mean_explosion_time(hi, cfg) < L)
        throw std::domain_error("a_L_inverse: L above m(a) at the upper bracket");
    double m_mid = 0.0;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < bracket.max_iter; ++it) {
        mid = 0.5 * (lo + hi);
        m_mid = mean_explosion_time(mid, cfg);
        if (std::abs(m_mid - L) <= 1e-6 * L) return mid;
        (m_mid < L ? lo : hi) = mid;
    }
    throw std::runtime_error("a_L_inverse: bisection did not reach tolerance");
}

double a_L_asymptotic(double L) {
    constexpr double e = 2.718281828459045;
    if (!(L >= e)) throw std::domain_error("a_L_asymptotic: need L >= e");
    const double lnL = std::log(L);
    const double lnlnL = std::log(lnL);
    const double lead = std::pow(0.375 * lnL, 2.0 / 3.0);
    const double corr = 1.0 + (2.0 / 9.0) * lnlnL / lnL +
                        (-(2.0 / 3.0) * std::log(std::numbers::pi) + (2.0 / 9.0) * std::log(0.375)) / lnL;
    return lead * corr;
}

ScalingParams ScalingParams::from_beta(double beta, const QuadratureConfig& cfg) {
    ScalingParams p;
    p.beta = beta;
    p.L = length_scale(beta); // validates the range
    // m maps (0, inf) onto (m(0+), inf) with m(0+) ~ 6.3; for the larger
    // admissible betas L falls below that and the exact inverse does not
    // exist, so the centering scale comes from the displayed expansion.
    if (p.L > mean_explosion_time(InverseBracket{}.a_lo, cfg)) {
        p.a_L = a_L_inverse(p.L, cfg);
        p.a_L_from_asymptotic = false;
    } else {
        p.a_L = a_L_asymptotic(p.L);
        p.a_L_from_asymptotic = true;
    }
    p.c_beta = std::pow(1.5 / beta * std::log(1.0 / (std::numbers::pi * beta)), 2.0 / 3.0);
    return p;
}

double rescale_eigenvalue(double lambda, const ScalingParams& params) {
    return 4.0 * std::sqrt(params.a_L) * (lambda + params.a_L);
}

ConvertedPoint convert_conventions(double mu, double psi_time, const ScalingParams& params) {
    const double r = 0.25 * params.beta;
    return {std::pow(r, 2.0 / 3.0) * mu, psi_time * std::pow(r, -1.0 / 3.0)};
}

ConvertedPoint invert_conventions(double lambda, double phi_time, const ScalingParams& params) {
    const double r = 0.25 * params.beta;
    return {lambda * std::pow(r, -2.0 / 3.0), phi_time * std::pow(r, 1.0 / 3.0)};
}

} // namespace sao
