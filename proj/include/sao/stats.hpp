#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sao {

// --- basic helpers ---------------------------------------------------------

double mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);
double median(std::vector<double> x);
double normal_cdf(double x);
// Regularized upper incomplete gamma Q(s, x); chi-square survival function.
double gamma_q(double s, double x);
double chi2_sf(double stat, double df);

// --- reference distributions -----------------------------------------------

enum class NamedCdf { Exp1, Gumbel, Uniform01, Normal01 };
double reference_cdf(NamedCdf which, double x);

// --- Kolmogorov-Smirnov ------------------------------------------------------

struct KsResult {
    double d = 0.0;
    double p_value = 1.0;
};

// One-sample KS with asymptotic p (Kolmogorov series, >= 25 terms).
KsResult ks_statistic(std::vector<double> sample, NamedCdf cdf);
KsResult ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult two_sample_ks(std::vector<double> x, std::vector<double> y);

// --- point processes ---------------------------------------------------------

struct PointProcessSample {
    std::vector<double> points; // sorted, nonnegative
    std::uint64_t replica_id = 0;
};

// Dyadic partition of [0, inf) with equal exponential mass 2^-n per cell:
// knots t^n_j = -ln(1 - j 2^-n), last knot +inf.
struct QuantileGrid {
    int n = 0;
    explicit QuantileGrid(int depth);
    std::vector<double> knots; // size 2^n + 1
    std::size_t cells() const { return knots.size() - 1; }
};

std::vector<std::size_t> interval_counts(const PointProcessSample& pp, const QuantileGrid& grid);
std::vector<std::size_t> interval_counts(const PointProcessSample& pp,
                                         const std::vector<double>& knots);

// Limiting mean count for an (r-interval x t-cell) box of the quantile grid:
// (e^{r_hi} - e^{r_lo}) 2^{-depth}.
inline double poisson_cell_intensity(double r_lo, double r_hi, int depth) {
    return (std::exp(r_hi) - std::exp(r_lo)) * std::pow(0.5, depth);
}

// --- Poisson verdicts --------------------------------------------------------

struct PoissonTestConfig {
    double alpha = 0.01;
    double corr_band = 3.0; // pairwise correlation band, in units of 1/sqrt(R)
};

struct PoissonVerdict {
    bool pass = false;
    bool dispersion_pass = false;
    bool chi2_pass = false;
    bool correlation_pass = false;
    std::vector<double> dispersion_index; // per cell
    std::vector<double> dispersion_p;     // per cell, two-sided
    double chi2_stat = 0.0;
    double chi2_df = 0.0;
    double chi2_p = 1.0;
    double max_abs_correlation = 0.0;
    std::vector<std::size_t> degenerate_cells; // all-zero with intensity > 0.5
};

// counts: replica-major matrix, replicas x cells; intensities: expected
// means per cell. Dispersion (variance/mean, normal approximation with a
// Bonferroni split of alpha), chi-square of the pooled count histogram
// against the Poisson mixture, and pairwise cross-cell correlations within
// corr_band/sqrt(replicas).
PoissonVerdict poisson_test(const std::vector<std::vector<std::size_t>>& counts,
                            const std::vector<double>& intensities,
                            const PoissonTestConfig& cfg = {});

// --- Ornstein-Uhlenbeck exit time --------------------------------------------

struct OUExitSpec {
    double theta = 1.0; // mean reversion > 0
    double nu = 1.0;    // in (0, 1]
    double b = 1.0;     // barrier scale > 0; exit level +-b/sqrt(2 theta)
};

// E[e^{-theta nu H}] = 1 / (1 + sum_k nu(nu+2)...(nu+2k-2)/(2k)! b^{2k});
// independent of theta.
double ou_exit_laplace(const OUExitSpec& spec, int terms);

struct OUExitMcResult {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::size_t capped_paths = 0; // paths that hit the step budget
};

OUExitMcResult ou_exit_mc(const OUExitSpec& spec, std::size_t n_paths, double dt,
                          std::uint64_t seed);

// --- McKean's law -------------------------------------------------------------

struct McKeanVerdict {
    double d = 0.0;
    double p_value = 0.0;
    bool pass = false;
};

// KS of gamma_samples / m_a against Exp(1); pass iff p > alpha.
McKeanVerdict mckean_exponential_test(const std::vector<double>& gamma_samples, double m_a,
                                      double alpha = 0.01);

// --- Gumbel fit ---------------------------------------------------------------

struct GumbelFit {
    double location = 0.0;
    double scale = 1.0;
};

// Two-parameter maximum-likelihood fit of the standard Gumbel family
// exp(-e^{-(x-location)/scale}).
GumbelFit gumbel_fit(const std::vector<double>& sample);
double gumbel_cdf(double x, const GumbelFit& fit);

// ECDF as plot-ready (x, y) pairs.
std::vector<std::pair<double, double>> ecdf(std::vector<double> sample);

} // namespace sao
