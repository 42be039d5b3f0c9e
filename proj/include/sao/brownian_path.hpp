#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "sao/rng.hpp"

namespace sao {

// One Brownian environment, shared by every diffusion that lives on it.
//
// Level-0 values sit on the equispaced grid t0 + i*dt. Finer values are
// Brownian-bridge midpoints whose randomness is keyed by the midpoint's
// global dyadic tick, so refinement is order-independent and re-querying a
// point always reproduces the same number. Already-generated values are
// never touched by refinement.
class BrownianPath {
  public:
    static constexpr int kMaxDepth = 30;
    static constexpr std::uint64_t kFracBits = 32;

    static BrownianPath generate(double t0, double t1, double dt, std::uint64_t seed,
                                 std::size_t cell_cap = (1u << 25));
    static BrownianPath zero(double t0, double t1, double dt);

    double t0() const { return t0_; }
    double t1() const { return t1_; }
    double dt() const { return dt_; }
    std::size_t cells() const { return n_cells_; }
    std::uint64_t seed() const { return seed_; }
    bool is_zero() const { return zero_; }
    int refinement_level() const { return refinement_level_; }

    double grid_time(std::size_t i) const { return t0_ + dt_ * static_cast<double>(i); }

    // B at grid node i (level 0).
    double node(std::size_t i) const;

    // B(t0 + (i+1) dt) - B(t0 + i dt); cheap, bypasses the bridge cache.
    double cell_increment(std::size_t i) const { return node(i + 1) - node(i); }

    // B at dyadic tick = cell*2^32 + frac, frac a multiple of 2^(32-kMaxDepth).
    double value_at_tick(std::uint64_t tick) const;

    // B at time t, snapped to the nearest dyadic point of depth snap_depth.
    double value(double t, int snap_depth = 16) const;

    // B(t) - B(s); s, t must lie on known dyadic points (off-grid throws).
    double increment(double s, double t) const;
    double increment_ticks(std::uint64_t s, std::uint64_t t) const;

    // Pre-materializes bridge midpoints on [t_lo, t_hi] down to step new_dt.
    // new_dt must be dt / 2^m for some m <= kMaxDepth.
    void refine(double t_lo, double t_hi, double new_dt);

    // Dyadic tick for a time; strict=true throws if t is not within
    // tolerance of a representable point.
    std::uint64_t tick_of(double t, int depth, bool strict) const;
    double time_of(std::uint64_t tick) const;

    // Persistence: paths are re-derivable from the seed, so only the grid
    // spec is stored.
    void dump(const std::string& file) const;
    static BrownianPath load(const std::string& file);

  private:
    BrownianPath() = default;
    void materialize_nodes(std::size_t i) const;
    double midpoint_value(std::uint64_t tick) const;

    double t0_ = 0.0, t1_ = 1.0, dt_ = 1.0;
    std::size_t n_cells_ = 0;
    std::uint64_t seed_ = 0;
    bool zero_ = false;
    int refinement_level_ = 0;

    // Level-0 spine, materialized lazily in chunks (prefix sums of keyed
    // increments; the realized values never depend on access order).
    struct Cache {
        std::vector<double> nodes;
        std::atomic<std::size_t> materialized{0};
        std::unordered_map<std::uint64_t, double> values;
        std::mutex mutex;
    };
    std::shared_ptr<Cache> cache_;
};

} // namespace sao
