#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sao {

// Counter-based randomness: every variate is a pure function of a 64-bit key.
// Refinement order, thread count and evaluation order therefore never change
// the realized noise.

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ mix64(b));
}

inline double uniform01_from_bits(std::uint64_t bits) {
    // (0,1]: never returns 0, safe under log().
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

// Standard normal keyed by (key, counter); Box-Muller on two hashed uniforms.
inline double keyed_normal(std::uint64_t key, std::uint64_t counter) {
    const std::uint64_t h1 = mix64(key ^ mix64(counter));
    const std::uint64_t h2 = mix64(h1 ^ kGolden);
    const double u1 = uniform01_from_bits(h1);
    const double u2 = uniform01_from_bits(h2);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Small sequential stream for samplers that consume a variable number of
// uniforms (rejection methods). State walk is splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(mix64(seed)) {}

    std::uint64_t next_bits() {
        state_ += kGolden;
        return mix64(state_);
    }

    double uniform() { return uniform01_from_bits(next_bits()); }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Marsaglia-Tsang; shape boost for k < 1. Scale 1.
    double gamma(double shape) {
        if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be > 0");
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // chi(dof) = sqrt(gamma(dof/2, scale 2)); dof may be non-integer.
    double chi(double dof) { return std::sqrt(2.0 * gamma(0.5 * dof)); }

  private:
    std::uint64_t state_;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replica_id) {
    return seed ^ mix64(replica_id + 1);
}

} // namespace sao
