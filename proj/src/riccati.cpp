#include "sao/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sao {

double DriftSpec::well_bottom(double t) const {
    const double lvl = level(t);
    if (lvl < 0.0) throw std::domain_error("well_bottom: a + beta t / 4 < 0");
    return std::sqrt(lvl);
}

std::size_t RiccatiTrajectory::explosion_count(double t_lo, double t_hi) const {
    std::size_t n = 0;
    for (double z : explosions)
        if (z > t_lo && z <= t_hi) ++n;
    return n;
}

double RiccatiTrajectory::value_at(double t) const {
    if (times.empty()) throw std::runtime_error("trajectory has no samples");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return values[lo] + w * (values[hi] - values[lo]);
}

std::size_t explosion_count(const RiccatiTrajectory& traj, double t_lo, double t_hi) {
    return traj.explosion_count(t_lo, t_hi);
}

namespace {

// One integration step is the Moebius map obtained from the symmetric
// kick-drift-kick splitting of the Riccati flow,
//   z -> K_{c/2} . D_h . K_{c/2},  K_c(z) = z + c,  D_h(z) = z / (1 + h z),
// with c = alpha(t_mid) h + dB. The drift factor is implicit in the -z^2
// term, the map extends to the compactified line (chart w = -1/z, regular
// through the blow-up), and the composed transfer-matrix chain is exactly
// the three-point Sturm recursion of the symmetric finite-difference
// operator whose node potential averages the two adjacent noise cells.
// Explosions of Z to -inf are downward zero crossings of w.

constexpr double kChartEps = 1e-12;

inline double z_switch(double alpha) {
    return 8.0 * std::max(1.0, std::sqrt(std::max(alpha, 0.0)));
}

struct State {
    bool in_w;
    double y; // z when !in_w, w = -1/z otherwise

    double as_z() const {
        if (!in_w) return y;
        if (y == 0.0) return kPlusInfinity;
        return -1.0 / y;
    }
};

inline void normalize_chart(State& s, double alpha, ChartPolicy policy = ChartPolicy::Auto) {
    if (policy == ChartPolicy::ForceZ) {
        if (s.in_w && s.y != 0.0) s = {false, -1.0 / s.y};
        return;
    }
    if (policy == ChartPolicy::ForceW) {
        if (!s.in_w && s.y != 0.0) s = {true, -1.0 / s.y};
        return;
    }
    const double zs = z_switch(alpha);
    if (!s.in_w) {
        if (std::abs(s.y) > zs) s = {true, -1.0 / s.y};
    } else {
        if (std::abs(s.y) * zs > 1.0 && s.y != 0.0) s = {false, -1.0 / s.y};
    }
}

// One Moebius step; returns true when the step crossed w = 0 downward
// (an explosion of Z to -inf followed by the restart from +inf).
inline bool moebius_step(State& s, double c, double h, double* w_before, double* w_after) {
    const double half = 0.5 * c;
    if (!s.in_w) {
        const double u = s.y + half;
        const double denom = 1.0 + h * u;
        if (std::abs(denom) < kChartEps) {
            s = {true, -1.0 / s.y};
        } else {
            s.y = u / denom + half;
            return false;
        }
    }
    const double w = s.y;
    const double w1 = w / (1.0 - half * w) - h;
    double wn = w1 / (1.0 - half * w1);
    if (wn == 0.0) wn = -std::numeric_limits<double>::min();
    s.y = wn;
    if (w_before) *w_before = w;
    if (w_after) *w_after = wn;
    return w > 0.0 && wn < 0.0;
}

struct CellNoise {
    // Increment of the driving noise over sub-cell j of 2^depth within the
    // integration cell k, together with mid-cell clock positions.
    const BrownianPath* path;
    bool reversed;
    std::uint64_t base_tick; // tick of clock position s = 0
    std::size_t base_cell;   // node index of clock position s = 0

    double whole_cell(std::size_t k) const {
        return reversed ? path->node(base_cell - k) - path->node(base_cell - k - 1)
                        : path->cell_increment(base_cell + k);
    }
    double sub_cell(std::size_t k, int depth, std::size_t j) const {
        const std::uint64_t width = (1ull << BrownianPath::kFracBits) >> depth;
        if (reversed) {
            const std::uint64_t hi = base_tick - (static_cast<std::uint64_t>(k) << BrownianPath::kFracBits) -
                                     static_cast<std::uint64_t>(j) * width;
            return path->increment_ticks(hi - width, hi);
        }
        const std::uint64_t lo = base_tick + (static_cast<std::uint64_t>(k) << BrownianPath::kFracBits) +
                                 static_cast<std::uint64_t>(j) * width;
        return path->increment_ticks(lo, lo + width);
    }
};

struct CoreResult {
    std::vector<double> s_samples;
    std::vector<double> z_samples;
    std::vector<double> s_explosions;
    double z_final = 0.0;
};

// Refines the explosion time inside one step: re-integrates the step with
// dyadically halved sub-steps (bridge noise from the shared path) until the
// interpolated zero crossing of w moves by less than tol.
double locate_crossing(const CellNoise& noise, std::size_t k, const State& step_start,
                       double s_step, double h, std::size_t j0, int d0, double alpha0,
                       double alpha1, double coarse_est, double tol, int max_depth,
                       ChartPolicy policy) {
    double prev = coarse_est;
    double last_move = 0.0;
    for (int extra = 1; extra + d0 <= max_depth; ++extra) {
        const std::size_t m = static_cast<std::size_t>(1) << extra;
        const double hs = h / static_cast<double>(m);
        State st = step_start;
        double est = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t j = 0; j < m; ++j) {
            const double s_mid = s_step + (static_cast<double>(j) + 0.5) * hs;
            const double alpha = alpha0 + alpha1 * s_mid;
            const double c = alpha * hs + noise.sub_cell(k, d0 + extra, (j0 << extra) + j);
            normalize_chart(st, alpha, policy);
            double wb = 0.0, wa = 0.0;
            if (moebius_step(st, c, hs, &wb, &wa)) {
                est = s_step + static_cast<double>(j) * hs + hs * wb / (wb - wa);
                break;
            }
        }
        if (std::isnan(est)) return prev; // crossing migrated out; keep best known
        last_move = std::abs(est - prev);
        if (last_move < tol) return est;
        prev = est;
    }
    if (last_move >= tol)
        throw std::runtime_error("riccati: explosion-time refinement did not meet tol");
    return prev;
}

CoreResult integrate_core(const BrownianPath& path, const CellNoise& noise, double alpha0,
                          double alpha1, std::size_t n_cells, double x0,
                          const IntegratorOptions& opts, double tol) {
    const int d0 = opts.substep_depth;
    if (d0 < 0 || d0 > 12) throw std::invalid_argument("riccati: bad substep depth");
    const std::size_t sub = static_cast<std::size_t>(1) << d0;
    const double h = path.dt() / static_cast<double>(sub);
    CoreResult out;

    State st{};
    if (std::isinf(x0)) {
        if (x0 < 0) throw std::invalid_argument("riccati: start from -inf is not admissible");
        st = {true, 0.0}; // entry from +infinity through the w-chart
    } else {
        st = {false, x0};
        normalize_chart(st, alpha0, opts.chart);
    }

    const std::size_t stride = opts.sample_stride;
    auto record = [&](double s, double z) {
        out.s_samples.push_back(s);
        out.z_samples.push_back(std::clamp(z, -1e300, 1e300));
    };
    if (stride) record(0.0, st.as_z());

    for (std::size_t k = 0; k < n_cells; ++k) {
        for (std::size_t j = 0; j < sub; ++j) {
            const double s_step = (static_cast<double>(k) + static_cast<double>(j) / sub) * path.dt();
            const double s_mid = s_step + 0.5 * h;
            const double alpha = alpha0 + alpha1 * s_mid;
            const double noise_inc = d0 == 0 ? noise.whole_cell(k) : noise.sub_cell(k, d0, j);
            const double c = alpha * h + noise_inc;
            normalize_chart(st, alpha, opts.chart);
            const State step_start = st;
            double wb = 0.0, wa = 0.0;
            if (moebius_step(st, c, h, &wb, &wa)) {
                const double coarse = s_step + h * wb / (wb - wa);
                const double s_star =
                    locate_crossing(noise, k, step_start, s_step, h, j, d0, alpha0, alpha1, coarse,
                                    tol, opts.max_refine_depth, opts.chart);
                out.s_explosions.push_back(s_star);
                if (out.s_explosions.size() >= opts.max_explosions) {
                    if (stride) record(s_step + h, st.as_z());
                    out.z_final = st.as_z();
                    return out;
                }
            }
        }
        if (stride && ((k + 1) % stride == 0 || k + 1 == n_cells))
            record(static_cast<double>(k + 1) * path.dt(), st.as_z());
    }
    out.z_final = st.as_z();
    return out;
}

double resolve_tol(const IntegratorOptions& opts, double span) {
    return opts.tol > 0.0 ? opts.tol : 1e-6 * span;
}

std::size_t aligned_steps(const BrownianPath& path, double span, const char* who) {
    const double raw = span / path.dt();
    const double rounded = std::round(raw);
    if (std::abs(raw - rounded) > 1e-6 || rounded < 1.0)
        throw std::invalid_argument(std::string(who) + ": endpoints must lie on the path grid");
    return static_cast<std::size_t>(rounded);
}

} // namespace

RiccatiTrajectory integrate_forward(const BrownianPath& path, const DriftSpec& drift, double t0,
                                    double x0, double t1, const IntegratorOptions& opts) {
    if (!(t0 < t1)) throw std::invalid_argument("integrate_forward: need t0 < t1");
    if (t0 < path.t0() - 1e-9 || t1 > path.t1() + 1e-9)
        throw std::out_of_range("integrate_forward: path does not cover [t0, t1]");
    const std::size_t n_steps = aligned_steps(path, t1 - t0, "integrate_forward");
    const double tol = resolve_tol(opts, t1 - t0);

    CellNoise noise{&path, false, path.tick_of(t0, 0, true),
                    static_cast<std::size_t>(path.tick_of(t0, 0, true) >> BrownianPath::kFracBits)};
    CoreResult core = integrate_core(path, noise, drift.a + 0.25 * drift.beta * t0,
                                     0.25 * drift.beta, n_steps, x0, opts, tol);

    RiccatiTrajectory traj;
    traj.direction = Direction::Forward;
    traj.a = drift.a;
    traj.beta = drift.beta;
    traj.t_start = t0;
    traj.t_stop = t1;
    traj.x_start = x0;
    traj.times.reserve(core.s_samples.size());
    for (double s : core.s_samples) traj.times.push_back(t0 + s);
    traj.values = std::move(core.z_samples);
    for (double s : core.s_explosions) traj.explosions.push_back(t0 + s);
    traj.terminal_value = core.z_final;
    return traj;
}

RiccatiTrajectory integrate_backward(const BrownianPath& path, const DriftSpec& drift,
                                     double t_end, double x_end, double t0,
                                     const IntegratorOptions& opts) {
    if (!(t0 < t_end)) throw std::invalid_argument("integrate_backward: need t0 < t_end");
    if (t0 < path.t0() - 1e-9 || t_end > path.t1() + 1e-9)
        throw std::out_of_range("integrate_backward: path does not cover [t0, t_end]");
    if (std::isinf(x_end) && x_end > 0)
        throw std::invalid_argument("integrate_backward: terminal +inf is not admissible");
    const std::size_t n_steps = aligned_steps(path, t_end - t0, "integrate_backward");
    const double tol = resolve_tol(opts, t_end - t0);

    // G(s) = -Zhat(t_end - s) solves the forward equation with level
    // a + beta (t_end - s)/4 against the time-reversed increments.
    const std::uint64_t tick_end = path.tick_of(t_end, 0, true);
    CellNoise noise{&path, true, tick_end,
                    static_cast<std::size_t>(tick_end >> BrownianPath::kFracBits)};
    const double g0 = std::isinf(x_end) ? kPlusInfinity : -x_end;
    CoreResult core = integrate_core(path, noise, drift.a + 0.25 * drift.beta * t_end,
                                     -0.25 * drift.beta, n_steps, g0, opts, tol);

    RiccatiTrajectory traj;
    traj.direction = Direction::Backward;
    traj.a = drift.a;
    traj.beta = drift.beta;
    traj.t_start = t_end;
    traj.t_stop = t0;
    traj.x_start = x_end;
    const std::size_t n = core.s_samples.size();
    traj.times.resize(n);
    traj.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        traj.times[i] = t_end - core.s_samples[n - 1 - i];
        traj.values[i] = -core.z_samples[n - 1 - i];
    }
    traj.explosions.resize(core.s_explosions.size());
    for (std::size_t i = 0; i < core.s_explosions.size(); ++i)
        traj.explosions[i] = t_end - core.s_explosions[core.s_explosions.size() - 1 - i];
    traj.terminal_value = -core.z_final;
    return traj;
}

RiccatiTrajectory hat_Z_canonical(const BrownianPath& path, double a, double beta,
                                  double horizon_T, double tol, const IntegratorOptions& opts) {
    DriftSpec drift{a, beta, true};
    if (2.0 * horizon_T > path.t1() + 1e-9)
        throw std::out_of_range("hat_Z_canonical: path must cover [0, 2 horizon_T]");
    IntegratorOptions o = opts;
    if (o.sample_stride == 0) o.sample_stride = 1;
    RiccatiTrajectory base =
        integrate_backward(path, drift, horizon_T, -drift.well_bottom(horizon_T), path.t0(), o);
    RiccatiTrajectory twice = integrate_backward(path, drift, 2.0 * horizon_T,
                                                 -drift.well_bottom(2.0 * horizon_T), path.t0(), o);

    // Certificate: discrepancy over [t0, horizon_T/2], skipping the spikes
    // where either solution is off to infinity; explosion times there must
    // match pairwise.
    const double cut = path.t0() + 0.5 * horizon_T;
    const double bound = 4.0 * z_switch(drift.level(cut));
    double sup = 0.0;
    for (std::size_t i = 0; i < base.times.size(); ++i) {
        const double t = base.times[i];
        if (t > cut) break;
        const double v1 = base.values[i];
        const double v2 = twice.value_at(t);
        if (std::abs(v1) > bound || std::abs(v2) > bound) continue;
        sup = std::max(sup, std::abs(v1 - v2));
    }
    std::vector<double> e1, e2;
    for (double z : base.explosions)
        if (z <= cut) e1.push_back(z);
    for (double z : twice.explosions)
        if (z <= cut) e2.push_back(z);
    if (e1.size() != e2.size())
        throw std::runtime_error("hat_Z_canonical: certificate failure (explosion counts differ)");
    for (std::size_t i = 0; i < e1.size(); ++i) sup = std::max(sup, std::abs(e1[i] - e2[i]));
    if (sup > tol)
        throw std::runtime_error("hat_Z_canonical: certificate failure (horizon doubling moved the solution)");
    base.certificate = sup;
    return base;
}

std::vector<RiccatiTrajectory> coupled_sweep(const BrownianPath& path,
                                             const std::vector<double>& a_grid, double beta,
                                             double t0, double t1, const IntegratorOptions& opts) {
    for (std::size_t i = 1; i < a_grid.size(); ++i)
        if (!(a_grid[i - 1] < a_grid[i]))
            throw std::invalid_argument("coupled_sweep: a_grid must be strictly increasing");
    std::vector<RiccatiTrajectory> out;
    out.reserve(a_grid.size());
    for (double a : a_grid) {
        try {
            out.push_back(integrate_forward(path, DriftSpec{a, beta, false}, t0, kPlusInfinity, t1, opts));
        } catch (const std::exception& e) {
            throw std::runtime_error("coupled_sweep: a = " + std::to_string(a) + ": " + e.what());
        }
    }
    return out;
}

} // namespace sao
