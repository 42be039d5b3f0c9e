#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <vector>

namespace sao {

// 16-point Gauss-Legendre panel, composite over caller-supplied edges.
namespace gl16 {
// Positive abscissae/weights on (0,1] side of [-1,1].
inline constexpr std::array<double, 8> x = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499,
};
inline constexpr std::array<double, 8> w = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541,
};
} // namespace gl16

template <typename F>
double gauss16(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < 8; ++i)
        acc += gl16::w[i] * (f(c + hw * gl16::x[i]) + f(c - hw * gl16::x[i]));
    return acc * hw;
}

// Integrates over [edges[0], edges.back()], each edge pair split into `sub`
// equal Gauss-Legendre panels.
template <typename F>
double composite_gauss16(F&& f, const std::vector<double>& edges, std::size_t sub) {
    double acc = 0.0;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        const double a = edges[e], b = edges[e + 1];
        const double step = (b - a) / static_cast<double>(sub);
        for (std::size_t j = 0; j < sub; ++j)
            acc += gauss16(f, a + step * static_cast<double>(j), a + step * static_cast<double>(j + 1));
    }
    return acc;
}

// Edges geometrically clustered around `center` with innermost width `w0`,
// growing by `ratio` out to [lo, hi].
inline std::vector<double> clustered_edges(double lo, double hi, double center, double w0,
                                           double ratio = 2.5) {
    std::vector<double> left{center}, right{center};
    double w = w0;
    while (left.back() > lo) {
        left.push_back(std::max(lo, left.back() - w));
        w *= ratio;
    }
    w = w0;
    while (right.back() < hi) {
        right.push_back(std::min(hi, right.back() + w));
        w *= ratio;
    }
    std::vector<double> edges(left.rbegin(), left.rend());
    edges.insert(edges.end(), right.begin() + 1, right.end());
    return edges;
}

} // namespace sao
