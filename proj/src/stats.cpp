#include "sao/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sao/rng.hpp"

namespace sao {

double mean(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double median(std::vector<double> x) {
    if (x.empty()) throw std::invalid_argument("median: empty sample");
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Regularized lower incomplete gamma by series; upper by continued fraction.
double gamma_p_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    for (int k = 1; k < 1000; ++k) {
        term *= x / (s + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

double gamma_q_cf(double s, double x) {
    double b = x + 1.0 - s;
    double c = 1e308;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

} // namespace

double gamma_q(double s, double x) {
    if (x < 0.0 || s <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
    return gamma_q_cf(s, x);
}

double chi2_sf(double stat, double df) { return gamma_q(0.5 * df, 0.5 * stat); }

double reference_cdf(NamedCdf which, double x) {
    switch (which) {
        case NamedCdf::Exp1: return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x);
        case NamedCdf::Gumbel: return std::exp(-std::exp(-x));
        case NamedCdf::Uniform01: return x <= 0.0 ? 0.0 : (x >= 1.0 ? 1.0 : x);
        case NamedCdf::Normal01: return normal_cdf(x);
    }
    throw std::logic_error("reference_cdf: unknown distribution");
}

namespace {

// Kolmogorov survival Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 lambda^2}.
double kolmogorov_q(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (j >= 25 && term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_p_value(double d, double n_eff) {
    const double sq = std::sqrt(n_eff);
    return kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
}

} // namespace

KsResult ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - f,
                                 f - static_cast<double>(i) / n));
    }
    return {d, ks_p_value(d, n)};
}

KsResult ks_statistic(std::vector<double> sample, NamedCdf cdf) {
    return ks_statistic(std::move(sample), [cdf](double x) { return reference_cdf(cdf, x); });
}

KsResult two_sample_ks(std::vector<double> x, std::vector<double> y) {
    if (x.size() < 8 || y.size() < 8)
        throw std::invalid_argument("two_sample_ks: need sample sizes >= 8");
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    const double n_eff = nx * ny / (nx + ny);
    return {d, ks_p_value(d, n_eff)};
}

QuantileGrid::QuantileGrid(int depth) : n(depth) {
    if (depth < 0 || depth > 24) throw std::invalid_argument("QuantileGrid: bad depth");
    const std::size_t cells = static_cast<std::size_t>(1) << depth;
    knots.resize(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j) {
        const double u = static_cast<double>(j) / static_cast<double>(cells);
        knots[j] = j == cells ? std::numeric_limits<double>::infinity() : -std::log1p(-u);
    }
}

std::vector<std::size_t> interval_counts(const PointProcessSample& pp,
                                         const std::vector<double>& knots) {
    std::vector<std::size_t> counts(knots.size() - 1, 0);
    for (double p : pp.points) {
        // cell j covers (knots[j], knots[j+1]]
        auto it = std::lower_bound(knots.begin(), knots.end(), p);
        if (it == knots.begin()) {
            if (p > knots.front()) ++counts.front();
            continue;
        }
        std::size_t j = static_cast<std::size_t>(it - knots.begin()) - 1;
        if (j < counts.size() && p > knots[j]) ++counts[j];
    }
    return counts;
}

std::vector<std::size_t> interval_counts(const PointProcessSample& pp, const QuantileGrid& grid) {
    return interval_counts(pp, grid.knots);
}

namespace {

double poisson_pmf(std::size_t k, double mu) {
    return std::exp(-mu + static_cast<double>(k) * std::log(mu) -
                    std::lgamma(static_cast<double>(k) + 1.0));
}

} // namespace

PoissonVerdict poisson_test(const std::vector<std::vector<std::size_t>>& counts,
                            const std::vector<double>& intensities, const PoissonTestConfig& cfg) {
    const std::size_t R = counts.size();
    if (R < 100) throw std::invalid_argument("poisson_test: need >= 100 replicas");
    const std::size_t C = intensities.size();
    for (const auto& row : counts)
        if (row.size() != C) throw std::invalid_argument("poisson_test: ragged counts matrix");

    PoissonVerdict v;
    v.dispersion_index.resize(C);
    v.dispersion_p.resize(C);

    // Per-cell dispersion index, two-sided normal approximation,
    // Bonferroni-split level across cells.
    v.dispersion_pass = true;
    for (std::size_t c = 0; c < C; ++c) {
        double m = 0.0;
        for (std::size_t r = 0; r < R; ++r) m += static_cast<double>(counts[r][c]);
        m /= static_cast<double>(R);
        double var = 0.0;
        for (std::size_t r = 0; r < R; ++r) {
            const double d = static_cast<double>(counts[r][c]) - m;
            var += d * d;
        }
        var /= static_cast<double>(R - 1);
        if (m == 0.0) {
            v.dispersion_index[c] = 1.0;
            v.dispersion_p[c] = 1.0;
            if (intensities[c] > 0.5) v.degenerate_cells.push_back(c);
            continue;
        }
        const double idx = var / m;
        const double z = (idx - 1.0) * std::sqrt(static_cast<double>(R - 1) / 2.0);
        const double p = 2.0 * (1.0 - normal_cdf(std::abs(z)));
        v.dispersion_index[c] = idx;
        v.dispersion_p[c] = p;
        if (p < cfg.alpha / static_cast<double>(C)) v.dispersion_pass = false;
    }

    // Chi-square of the pooled count histogram against the Poisson mixture
    // over cells; small expected bins merged into the tail.
    std::size_t kmax = 0;
    for (const auto& row : counts)
        for (std::size_t c = 0; c < C; ++c) kmax = std::max(kmax, row[c]);
    std::vector<double> expected(kmax + 2, 0.0);
    std::vector<double> observed(kmax + 2, 0.0);
    for (std::size_t k = 0; k <= kmax; ++k) {
        double e = 0.0;
        for (std::size_t c = 0; c < C; ++c) e += poisson_pmf(k, intensities[c]);
        expected[k] = e * static_cast<double>(R);
    }
    {
        // tail bin: everything above kmax
        double tail = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            double cum = 0.0;
            for (std::size_t k = 0; k <= kmax; ++k) cum += poisson_pmf(k, intensities[c]);
            tail += 1.0 - cum;
        }
        expected[kmax + 1] = tail * static_cast<double>(R);
    }
    for (const auto& row : counts)
        for (std::size_t c = 0; c < C; ++c) observed[row[c]] += 1.0;

    // merge bins with expected < 5 from the right
    std::vector<double> eb, ob;
    double e_acc = 0.0, o_acc = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        e_acc += expected[k];
        o_acc += observed[k];
        if (e_acc >= 5.0) {
            eb.push_back(e_acc);
            ob.push_back(o_acc);
            e_acc = o_acc = 0.0;
        }
    }
    if (e_acc > 0.0 && !eb.empty()) {
        eb.back() += e_acc;
        ob.back() += o_acc;
    }
    if (eb.size() >= 2) {
        double stat = 0.0;
        for (std::size_t k = 0; k < eb.size(); ++k) {
            const double d = ob[k] - eb[k];
            stat += d * d / eb[k];
        }
        v.chi2_stat = stat;
        v.chi2_df = static_cast<double>(eb.size() - 1);
        v.chi2_p = chi2_sf(stat, v.chi2_df);
        v.chi2_pass = v.chi2_p >= cfg.alpha;
    } else {
        v.chi2_pass = true; // not enough mass to test
        v.chi2_p = 1.0;
    }

    // Cross-cell correlations within the configured band.
    v.correlation_pass = true;
    std::vector<double> mu(C, 0.0), sd(C, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t r = 0; r < R; ++r) mu[c] += static_cast<double>(counts[r][c]);
        mu[c] /= static_cast<double>(R);
        for (std::size_t r = 0; r < R; ++r) {
            const double d = static_cast<double>(counts[r][c]) - mu[c];
            sd[c] += d * d;
        }
        sd[c] = std::sqrt(sd[c] / static_cast<double>(R - 1));
    }
    const double band = cfg.corr_band / std::sqrt(static_cast<double>(R));
    for (std::size_t c1 = 0; c1 < C; ++c1) {
        for (std::size_t c2 = c1 + 1; c2 < C; ++c2) {
            if (sd[c1] == 0.0 || sd[c2] == 0.0) continue;
            double cov = 0.0;
            for (std::size_t r = 0; r < R; ++r)
                cov += (static_cast<double>(counts[r][c1]) - mu[c1]) *
                       (static_cast<double>(counts[r][c2]) - mu[c2]);
            cov /= static_cast<double>(R - 1);
            const double rho = cov / (sd[c1] * sd[c2]);
            v.max_abs_correlation = std::max(v.max_abs_correlation, std::abs(rho));
            if (std::abs(rho) > band) v.correlation_pass = false;
        }
    }

    v.pass = v.dispersion_pass && v.chi2_pass && v.correlation_pass && v.degenerate_cells.empty();
    return v;
}

double ou_exit_laplace(const OUExitSpec& spec, int terms) {
    if (terms < 10) throw std::invalid_argument("ou_exit_laplace: need terms >= 10");
    if (!(spec.nu > 0.0) || spec.nu > 1.0)
        throw std::invalid_argument("ou_exit_laplace: nu must lie in (0, 1]");
    if (spec.b < 0.0 || spec.b > 10.0)
        throw std::invalid_argument("ou_exit_laplace: b must lie in [0, 10]");
    const double b2 = spec.b * spec.b;
    // c_k = nu (nu+2) ... (nu+2k-2) / (2k)!; c_{k+1} = c_k (nu+2k) / ((2k+1)(2k+2))
    double c = spec.nu / 2.0;
    double sum = 0.0;
    double term = 0.0;
    for (int k = 1; k <= terms; ++k) {
        term = c * std::pow(b2, k);
        sum += term;
        c *= (spec.nu + 2.0 * k) / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
    }
    const double next = c * std::pow(b2, terms + 1);
    if (std::abs(next) > 1e-10 * (1.0 + sum))
        throw std::runtime_error("ou_exit_laplace: truncation error above 1e-10; increase terms");
    return 1.0 / (1.0 + sum);
}

OUExitMcResult ou_exit_mc(const OUExitSpec& spec, std::size_t n_paths, double dt,
                          std::uint64_t seed) {
    if (n_paths < 10000) throw std::invalid_argument("ou_exit_mc: need n_paths >= 10^4");
    const double barrier = spec.b / std::sqrt(2.0 * spec.theta);
    // Broadie-Glasserman continuity correction for discrete monitoring.
    const double barrier_eff = std::max(1e-12, barrier - 0.5826 * std::sqrt(dt));
    const double t_cap = 40.0 / (spec.theta * spec.nu);
    const std::size_t max_steps = static_cast<std::size_t>(t_cap / dt) + 1;
    const double sd = std::sqrt(dt);

    OUExitMcResult res;
    double acc = 0.0, acc2 = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
        Rng rng(derive_seed(seed, p));
        double u = 0.0;
        std::size_t step = 0;
        while (std::abs(u) < barrier_eff && step < max_steps) {
            u += -spec.theta * u * dt + sd * rng.normal();
            ++step;
        }
        if (step >= max_steps) ++res.capped_paths;
        const double h = static_cast<double>(step) * dt;
        const double val = std::exp(-spec.theta * spec.nu * h);
        acc += val;
        acc2 += val * val;
    }
    const double n = static_cast<double>(n_paths);
    res.estimate = acc / n;
    res.stderr_ = std::sqrt(std::max(0.0, acc2 / n - res.estimate * res.estimate) / n);
    return res;
}

McKeanVerdict mckean_exponential_test(const std::vector<double>& gamma_samples, double m_a,
                                      double alpha) {
    if (gamma_samples.size() < 300)
        throw std::invalid_argument("mckean_exponential_test: need >= 300 samples");
    std::vector<double> scaled(gamma_samples.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = gamma_samples[i] / m_a;
    const KsResult ks = ks_statistic(std::move(scaled), NamedCdf::Exp1);
    return {ks.d, ks.p_value, ks.p_value > alpha};
}

GumbelFit gumbel_fit(const std::vector<double>& sample) {
    if (sample.size() < 8) throw std::invalid_argument("gumbel_fit: need sample size >= 8");
    const double xbar = mean(sample);
    double lo = 1e-8, hi = 0.0;
    for (double x : sample) hi = std::max(hi, std::abs(x - xbar));
    hi = std::max(hi * 2.0, 1e-6);

    auto weighted_mean = [&](double sigma) {
        // sum x e^{-x/sigma} / sum e^{-x/sigma}, stabilized by the max shift
        double mx = -std::numeric_limits<double>::infinity();
        for (double x : sample) mx = std::max(mx, -x / sigma);
        double num = 0.0, den = 0.0;
        for (double x : sample) {
            const double w = std::exp(-x / sigma - mx);
            num += x * w;
            den += w;
        }
        return num / den;
    };
    auto g = [&](double sigma) { return sigma - xbar + weighted_mean(sigma); };

    // g is increasing in sigma; bracket then bisect.
    double glo = g(lo);
    double ghi = g(hi);
    int guard = 0;
    while (glo > 0.0 && guard++ < 60) {
        lo *= 0.5;
        glo = g(lo);
    }
    guard = 0;
    while (ghi < 0.0 && guard++ < 60) {
        hi *= 2.0;
        ghi = g(hi);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
        if (hi - lo < 1e-12 * (1.0 + hi)) break;
    }
    const double sigma = 0.5 * (lo + hi);
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : sample) mx = std::max(mx, -x / sigma);
    double den = 0.0;
    for (double x : sample) den += std::exp(-x / sigma - mx);
    const double mu = sigma * (mx + std::log(den / static_cast<double>(sample.size()))) * -1.0;
    return {mu, sigma};
}

double gumbel_cdf(double x, const GumbelFit& fit) {
    return std::exp(-std::exp(-(x - fit.location) / fit.scale));
}

std::vector<std::pair<double, double>> ecdf(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    std::vector<std::pair<double, double>> out(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i)
        out[i] = {sample[i], (static_cast<double>(i) + 1.0) / static_cast<double>(sample.size())};
    return out;
}

} // namespace sao
