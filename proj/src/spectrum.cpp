#include "sao/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sao {

std::size_t eigenvalue_count(const BrownianPath& path, double beta, double T, double a,
                             std::size_t stop_after) {
    IntegratorOptions opts;
    opts.sample_stride = 0;
    opts.max_explosions = stop_after;
    RiccatiTrajectory traj =
        integrate_forward(path, DriftSpec{a, beta, false}, 0.0, kPlusInfinity, T, opts);
    return traj.explosion_count(0.0, T);
}

BisectResult eigenvalue_bisect(const BrownianPath& path, double beta, double T, std::size_t k,
                               double tol, double a_guess) {
    if (k < 1) throw std::invalid_argument("eigenvalue_bisect: k must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("eigenvalue_bisect: tol must be > 0");
    BisectResult res;
    auto count = [&](double a, std::size_t cap) {
        ++res.count_evaluations;
        return eigenvalue_count(path, beta, T, a, cap);
    };

    // count(a) = #{lambda_i <= -a} is non-increasing in a. Bracket the
    // k -> k-1 transition, expanding geometrically.
    double lo = a_guess - 1.0, hi = a_guess + 1.0;
    double w = 2.0;
    int guard = 0;
    while (count(hi, k) >= k) {
        hi += w;
        w *= 2.0;
        if (++guard > 60) throw std::runtime_error("eigenvalue_bisect: bracket failure (upper)");
    }
    w = 2.0;
    guard = 0;
    while (count(lo, k) < k) {
        lo -= w;
        w *= 2.0;
        if (++guard > 60) throw std::runtime_error("eigenvalue_bisect: bracket failure (lower)");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (count(mid, k) >= k ? lo : hi) = mid;
    }
    res.lambda = -0.5 * (lo + hi);
    res.lambda_inside = -lo;
    const std::size_t c_lo = count(lo, k + 1);
    const std::size_t c_hi = count(hi, k + 1);
    res.tie_warning = (c_lo >= k + 1) || (c_hi + 2 <= c_lo);
    return res;
}

namespace {

// Local closed-form primitive near a zero of phi: phi ~ sigma_alpha(t - zeta)
// with sigma the sinh/linear/sin solution of sigma'' = alpha sigma.
double log_sigma(double alpha, double s) {
    const double as = std::abs(s);
    if (as < 1e-300) return -690.0; // log of ~1e-300
    if (alpha > 1e-12) {
        const double r = std::sqrt(alpha);
        // log(sinh(r |s|)/r), overflow-safe
        const double x = r * as;
        const double ls = x > 30.0 ? x - std::log(2.0) : std::log(std::sinh(x));
        return ls - std::log(r);
    }
    if (alpha < -1e-12) {
        const double r = std::sqrt(-alpha);
        return std::log(std::abs(std::sin(r * as))) - std::log(r);
    }
    return std::log(as);
}

struct LogAccumulator {
    // Integrates chi over grid cells; model-based through the poles.
    const std::vector<double>* times;
    const std::vector<double>* values;
    const std::vector<double>* anchors; // sorted candidate zero locations
    double alpha0, alpha1;              // drift level a + beta t / 4
    double z_model;                     // |z| above which the local model is used

    double level(double t) const { return alpha0 + alpha1 * t; }

    double anchor_before(double t) const {
        auto it = std::upper_bound(anchors->begin(), anchors->end(), t);
        if (it == anchors->begin()) return -1e300;
        return *(it - 1);
    }
    double anchor_after(double t) const {
        auto it = std::lower_bound(anchors->begin(), anchors->end(), t);
        if (it == anchors->end()) return 1e300;
        return *it;
    }

    // increment of log|phi| over [t_i, t_{i+1}]
    double cell(std::size_t i) const {
        const double t0 = (*times)[i], t1 = (*times)[i + 1];
        const double z0 = (*values)[i], z1 = (*values)[i + 1];
        if (std::abs(z0) <= z_model && std::abs(z1) <= z_model)
            return 0.5 * (z0 + z1) * (t1 - t0);
        // near a pole: anchor at the zero the trajectory is entering/leaving
        double zeta;
        if (z0 < -z_model || z1 < -z_model)
            zeta = anchor_after(t0 + 1e-12);
        else
            zeta = anchor_before(t1 - 1e-12);
        const double alpha = level(std::clamp(zeta, t0 - 1.0, t1 + 1.0));
        return log_sigma(alpha, t1 - zeta) - log_sigma(alpha, t0 - zeta);
    }
};

} // namespace

Eigenfunction reconstruct_eigenfunction(const BrownianPath& path, double beta, double T,
                                        double lambda_k, double tol) {
    const double a = -lambda_k;
    DriftSpec drift{a, beta, false};
    IntegratorOptions opts;
    opts.sample_stride = 1;
    RiccatiTrajectory fwd = integrate_forward(path, drift, 0.0, kPlusInfinity, T, opts);
    RiccatiTrajectory bwd = integrate_backward(path, drift, T, kMinusInfinity, 0.0, opts);

    const std::vector<double>& ts = fwd.times;
    const std::size_t n = ts.size();
    if (n < 4) throw std::invalid_argument("reconstruct_eigenfunction: grid too coarse");
    if (bwd.times.size() != n)
        throw std::runtime_error("reconstruct_eigenfunction: sample grids disagree");

    const double z_model = 8.0 * std::max(1.0, std::sqrt(std::max(a + 0.25 * beta * T, 0.0)));

    // Stitch at a barrier-crossing center where both solutions are still
    // squeezed onto the eigenfunction: among the downward zero crossings the
    // forward solution resolves before its final explosion (beyond which the
    // shooting separates), take the one where the two log-slopes agree best.
    double t_trust = fwd.times.back() + 1.0;
    if (!fwd.explosions.empty()) t_trust = fwd.explosions.back();
    std::size_t iv = 0;
    double best = 1e300;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (ts[i + 1] >= t_trust) break;
        if (fwd.values[i] >= 0.0 && fwd.values[i + 1] < 0.0 && fwd.values[i] <= z_model) {
            const double gap = std::abs(fwd.values[i] - bwd.values[i]);
            if (gap < best) {
                best = gap;
                iv = i;
            }
        }
    }
    if (iv == 0) iv = n / 2; // no crossing resolved; fall back to mid-domain

    const double mismatch = std::abs(fwd.values[iv] - bwd.values[iv]);
    if (mismatch > 10.0 * tol)
        throw std::runtime_error("reconstruct_eigenfunction: forward/backward log-slopes "
                                 "disagree at the stitch point");

    // anchors: candidate zeros of phi for the pole model
    std::vector<double> anchors_f{0.0};
    anchors_f.insert(anchors_f.end(), fwd.explosions.begin(), fwd.explosions.end());
    anchors_f.push_back(T);
    std::vector<double> anchors_b = bwd.explosions;
    anchors_b.insert(anchors_b.begin(), 0.0);
    anchors_b.push_back(T);

    LogAccumulator accF{&fwd.times, &fwd.values, &anchors_f, a, 0.25 * beta, z_model};
    LogAccumulator accB{&bwd.times, &bwd.values, &anchors_b, a, 0.25 * beta, z_model};

    std::vector<double> logphi(n, -1e300);
    std::vector<int> sign(n, 1);

    // forward sweep on [t_1, t_iv]
    logphi[1] = log_sigma(a, ts[1]);
    sign[1] = 1;
    for (std::size_t i = 1; i < iv; ++i) {
        logphi[i + 1] = logphi[i] + accF.cell(i);
        int s = sign[i];
        for (double z : fwd.explosions)
            if (z > ts[i] && z <= ts[i + 1]) s = -s;
        sign[i + 1] = s;
    }
    // backward sweep continues from the stitch point on [t_iv, T]
    for (std::size_t i = iv; i + 1 < n; ++i) {
        logphi[i + 1] = logphi[i] + accB.cell(i);
        int s = sign[i];
        for (double z : bwd.explosions)
            if (z > ts[i] && z <= ts[i + 1]) s = -s;
        sign[i + 1] = s;
    }
    logphi[0] = -1e300; // phi(0) = 0 (Dirichlet)

    double peak = -1e300;
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, logphi[i]);

    Eigenfunction phi;
    phi.lambda = lambda_k;
    phi.times = ts;
    phi.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        phi.values[i] = static_cast<double>(sign[i]) * std::exp(logphi[i] - peak);
    // trapezoid L2 normalization
    double norm2 = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = ts[i + 1] - ts[i];
        norm2 += 0.5 * h * (phi.values[i] * phi.values[i] + phi.values[i + 1] * phi.values[i + 1]);
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& v : phi.values) v *= inv;
    phi.center = localization_center(phi.times, phi.values);
    phi.stitch_time = ts[iv];
    phi.stitch_mismatch = mismatch;
    return phi;
}

double localization_center(const std::vector<double>& times, const std::vector<double>& values) {
    if (times.empty() || times.size() != values.size())
        throw std::invalid_argument("localization_center: bad sampled function");
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = std::abs(values[i]);
        if (v > best_v + 1e-15 * std::max(1.0, best_v)) {
            best_v = v;
            best = i;
        }
    }
    return times[best];
}

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const double w = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
    return ys[hi - 1] + w * (ys[hi] - ys[hi - 1]);
}

} // namespace

ShapeProfiles shape_profiles(const Eigenfunction& phi, const BrownianPath& path, double U_k,
                             double a_L, double x_max, std::size_t n_points) {
    if (!(a_L > 0.0)) throw std::invalid_argument("shape_profiles: a_L must be > 0");
    const double sq = std::sqrt(a_L);
    if (U_k - x_max / sq < phi.times.front() - 1e-9 || U_k + x_max / sq > phi.times.back() + 1e-9)
        throw std::out_of_range("shape_profiles: window leaves the solved interval");
    ShapeProfiles out;
    out.xs.resize(n_points);
    out.h.resize(n_points);
    out.b.resize(n_points);
    const double amp = std::sqrt(2.0) / std::pow(a_L, 0.25);
    const double bu = path.value(U_k);
    // sign convention: profiles are reported with phi(U_k) > 0
    const double flip = interp(phi.times, phi.values, U_k) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double x = -x_max + 2.0 * x_max * static_cast<double>(i) /
                                       static_cast<double>(n_points - 1);
        const double t = U_k + x / sq;
        out.xs[i] = x;
        out.h[i] = flip * amp * interp(phi.times, phi.values, t);
        out.b[i] = (path.value(t) - bu) / sq;
        out.h_sup_dist = std::max(out.h_sup_dist, std::abs(out.h[i] - 1.0 / std::cosh(x)));
        out.b_sup_dist = std::max(out.b_sup_dist, std::abs(out.b[i] + 2.0 * std::tanh(x)));
    }
    return out;
}

CrossingEvent extract_crossing(const RiccatiTrajectory& traj, double a_L) {
    if (!(a_L > 0.0)) throw std::invalid_argument("extract_crossing: a_L must be > 0");
    const double sq = std::sqrt(a_L);
    const std::vector<double>& ts = traj.times;
    const std::vector<double>& zs = traj.values;
    const std::size_t n = ts.size();

    // theta: first hit of -sqrt(a_L) (crossing cell, linear interpolation)
    std::size_t i_theta = 0;
    double theta = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (zs[i] > -sq && zs[i + 1] <= -sq && zs[i] < 2.0 * sq + 10.0) {
            const double w = (zs[i] + sq) / (zs[i] - zs[i + 1]);
            theta = ts[i] + w * (ts[i + 1] - ts[i]);
            i_theta = i + 1;
            break;
        }
    }
    if (std::isnan(theta)) throw std::runtime_error("extract_crossing: no hit of -sqrt(a_L)");

    // iota / upsilon: last hits of +sqrt(a_L) and 0 before theta
    double iota = std::numeric_limits<double>::quiet_NaN();
    double upsilon = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = i_theta; i-- > 1;) {
        if (std::isnan(upsilon) && zs[i - 1] >= 0.0 && zs[i] < 0.0 && zs[i - 1] < 2.0 * sq + 10.0) {
            const double w = zs[i - 1] / (zs[i - 1] - zs[i]);
            upsilon = ts[i - 1] + w * (ts[i] - ts[i - 1]);
        }
        if (zs[i - 1] >= sq && zs[i] < sq && zs[i - 1] < 2.0 * sq + 10.0) {
            const double w = (zs[i - 1] - sq) / (zs[i - 1] - zs[i]);
            iota = ts[i - 1] + w * (ts[i] - ts[i - 1]);
            break;
        }
    }
    if (std::isnan(iota) || std::isnan(upsilon))
        throw std::runtime_error("extract_crossing: crossing start not resolved");

    CrossingEvent ev;
    ev.iota = iota;
    ev.upsilon = upsilon;
    ev.theta = theta;
    ev.zeta = std::numeric_limits<double>::quiet_NaN();
    for (double z : traj.explosions)
        if (z >= theta) {
            ev.zeta = z;
            break;
        }
    for (std::size_t i = 0; i < n; ++i) {
        if (ts[i] < iota || ts[i] > theta) continue;
        const double model = sq * std::tanh(-sq * (ts[i] - upsilon));
        ev.tanh_sup_dist = std::max(ev.tanh_sup_dist, std::abs(zs[i] - model));
    }
    return ev;
}

SpectralResult solve_spectrum(const BrownianPath& path, double beta, double T, std::size_t k_max,
                              double tol, bool with_eigenfunctions, double length_scale) {
    SpectralResult res;
    std::vector<double> inside;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const double guess = res.lambdas.empty() ? 0.0 : -res.lambdas.back();
        BisectResult bis = eigenvalue_bisect(path, beta, T, k, tol, guess);
        res.lambdas.push_back(bis.lambda);
        inside.push_back(bis.lambda_inside);
    }
    if (with_eigenfunctions) {
        IntegratorOptions opts;
        opts.sample_stride = 1;
        const double L = length_scale > 0.0 ? length_scale : T;
        for (double lambda : inside) {
            res.eigenfunctions.push_back(reconstruct_eigenfunction(path, beta, T, lambda));
            res.centers.push_back(res.eigenfunctions.back().center);
            res.chis.push_back(integrate_forward(path, DriftSpec{-lambda, beta, false}, 0.0,
                                                 kPlusInfinity, T, opts));
            res.measures.push_back(measure_density(res.eigenfunctions.back(), L));
        }
    }
    return res;
}

std::vector<std::pair<double, double>> measure_density(const Eigenfunction& phi, double L) {
    std::vector<std::pair<double, double>> out(phi.times.size());
    for (std::size_t i = 0; i < phi.times.size(); ++i)
        out[i] = {phi.times[i] / L, L * phi.values[i] * phi.values[i]};
    return out;
}

} // namespace sao
