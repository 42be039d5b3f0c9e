#include "sao/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sao {

TridiagonalOperator build_operator(const BrownianPath& path, double beta, double T,
                                   std::size_t n) {
    if (n < 8) throw std::invalid_argument("build_operator: n must be >= 8");
    if (path.t0() > 1e-12 || T > path.t1() + 1e-9)
        throw std::out_of_range("build_operator: path does not cover [0, T]");
    TridiagonalOperator op;
    op.n = n;
    op.dx = T / static_cast<double>(n + 1);
    op.mat.diag.resize(n);
    op.mat.off.assign(n - 1, -1.0 / (op.dx * op.dx));
    const double inv_dx2 = 1.0 / (op.dx * op.dx);
    // Node-centered window spanning the two adjacent noise cells,
    // (B(t+dx) - B(t-dx)) / (2 dx): exactly the cell realization the Riccati
    // transfer-matrix chain attaches to the node, which makes the count
    // comparison an identity per environment rather than a distributional
    // statement.
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i + 1) * op.dx;
        const double noise = (path.value(t + op.dx, 20) - path.value(t - op.dx, 20)) / (2.0 * op.dx);
        op.mat.diag[i] = 2.0 * inv_dx2 + 0.25 * beta * t + noise;
    }
    return op;
}

std::size_t count_below(const SymTridiagonal& m, double sigma) {
    // Pivot-sign recurrence; zero pivots perturbed to a tiny negative value.
    double scale = 0.0;
    for (double d : m.diag) scale = std::max(scale, std::abs(d));
    for (double o : m.off) scale = std::max(scale, o * o);
    const double pivmin = std::numeric_limits<double>::epsilon() * std::max(scale, 1.0);

    std::size_t count = 0;
    double d = m.diag[0] - sigma;
    if (d == 0.0) d = -pivmin;
    if (d < 0.0) ++count;
    for (std::size_t i = 1; i < m.n(); ++i) {
        d = (m.diag[i] - sigma) - m.off[i - 1] * m.off[i - 1] / d;
        if (d == 0.0) d = -pivmin;
        if (d < 0.0) ++count;
    }
    return count;
}

std::size_t sturm_count(const SymTridiagonal& m, double a) {
    // Eigenvalues <= -a; the boundary case has measure zero, pivots break
    // ties toward "below".
    return count_below(m, -a);
}

namespace {

std::pair<double, double> gershgorin(const SymTridiagonal& m) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    const std::size_t n = m.n();
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(m.off[i - 1]);
        if (i + 1 < n) r += std::abs(m.off[i]);
        lo = std::min(lo, m.diag[i] - r);
        hi = std::max(hi, m.diag[i] + r);
    }
    return {lo, hi};
}

double bisect_kth(const SymTridiagonal& m, std::size_t k, double lo, double hi, double tol) {
    // smallest sigma with count_below(sigma) >= k
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(m, mid) >= k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::vector<double> eigenvalues(const SymTridiagonal& m, std::size_t k_max, double tol) {
    if (k_max > m.n()) throw std::invalid_argument("eigenvalues: k_max > n");
    auto [lo, hi] = gershgorin(m);
    std::vector<double> out;
    out.reserve(k_max);
    double left = lo;
    for (std::size_t k = 1; k <= k_max; ++k) {
        out.push_back(bisect_kth(m, k, left, hi, tol));
        left = out.back() - tol;
    }
    return out;
}

std::vector<double> top_eigenvalues(const SymTridiagonal& m, std::size_t k_max, double tol) {
    if (k_max > m.n()) throw std::invalid_argument("top_eigenvalues: k_max > n");
    auto [lo, hi] = gershgorin(m);
    std::vector<double> out;
    out.reserve(k_max);
    const std::size_t n = m.n();
    for (std::size_t j = 1; j <= k_max; ++j) out.push_back(bisect_kth(m, n - j + 1, lo, hi, tol));
    return out;
}

namespace {

// LU factorization of a general tridiagonal matrix with partial pivoting
// (gttrf/gttrs layout): dl sub, d main, du super, du2 second super.
struct TriLU {
    std::vector<double> dl, d, du, du2;
    std::vector<bool> swapped;

    void factor(const SymTridiagonal& m, double lambda) {
        const std::size_t n = m.n();
        dl.assign(n > 1 ? n - 1 : 0, 0.0);
        d.resize(n);
        du.assign(n > 1 ? n - 1 : 0, 0.0);
        du2.assign(n > 2 ? n - 2 : 0, 0.0);
        swapped.assign(n > 1 ? n - 1 : 0, false);
        for (std::size_t i = 0; i < n; ++i) d[i] = m.diag[i] - lambda;
        for (std::size_t i = 0; i + 1 < n; ++i) dl[i] = du[i] = m.off[i];
        const double tiny = std::numeric_limits<double>::min() * 4.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (std::abs(d[i]) >= std::abs(dl[i])) {
                if (d[i] == 0.0) d[i] = tiny;
                const double fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                const double fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                const double temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                du[i] = temp;
                if (i + 2 < n) {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                swapped[i] = true;
            }
        }
        if (d[n - 1] == 0.0) d[n - 1] = tiny;
    }

    void solve(std::vector<double>& b) const {
        const std::size_t n = d.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (!swapped[i]) {
                b[i + 1] -= dl[i] * b[i];
            } else {
                const double temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - dl[i] * b[i];
            }
        }
        b[n - 1] /= d[n - 1];
        if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for (std::size_t ii = n - 1; ii-- > 1;) {
            const std::size_t i = ii - 1;
            b[i] = (b[i] - du[i] * b[i + 1] - (i < du2.size() ? du2[i] * b[i + 2] : 0.0)) / d[i];
        }
    }
};

} // namespace

std::vector<double> eigenvector(const SymTridiagonal& m, double lambda, double tol) {
    const std::size_t n = m.n();
    TriLU lu;
    lu.factor(m, lambda);

    std::vector<double> v(n);
    Rng rng(0xE1697EC7u ^ static_cast<std::uint64_t>(n));
    for (auto& x : v) x = rng.normal();

    double scale = std::abs(lambda);
    for (double x : m.diag) scale = std::max(scale, std::abs(x));
    for (double x : m.off) scale = std::max(scale, 2.0 * std::abs(x));
    const double target =
        std::max({tol, 1e-8, 64.0 * std::numeric_limits<double>::epsilon() * scale});
    double resid = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 100 && resid > target; ++it) {
        lu.solve(v);
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (auto& x : v) x /= norm;
        resid = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = (m.diag[i] - lambda) * v[i];
            if (i > 0) r += m.off[i - 1] * v[i - 1];
            if (i + 1 < n) r += m.off[i] * v[i + 1];
            resid += r * r;
        }
        resid = std::sqrt(resid);
    }
    if (resid > target)
        throw std::runtime_error("eigenvector: inverse iteration did not converge in 100 iterations");
    for (double x : v) {
        if (std::abs(x) > 1e-12) {
            if (x < 0.0)
                for (auto& y : v) y = -y;
            break;
        }
    }
    return v;
}

} // namespace sao
