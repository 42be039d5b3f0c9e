#include "sao/brownian_path.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace sao {

namespace {
constexpr std::uint64_t kIncrementTag = 0x1C4E'5D00'0000'0001ull;
constexpr std::uint64_t kBridgeTag = 0xB21D'6E00'0000'0002ull;
} // namespace

BrownianPath BrownianPath::generate(double t0, double t1, double dt, std::uint64_t seed,
                                    std::size_t cell_cap) {
    if (!(t0 < t1)) throw std::invalid_argument("BrownianPath: need t0 < t1");
    if (!(dt > 0.0)) throw std::invalid_argument("BrownianPath: need dt > 0");
    const double raw = (t1 - t0) / dt;
    if (raw > static_cast<double>(cell_cap))
        throw std::length_error("BrownianPath: grid exceeds memory cap");
    BrownianPath p;
    p.t0_ = t0;
    p.t1_ = t1;
    p.dt_ = dt;
    p.n_cells_ = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    if (p.n_cells_ == 0) p.n_cells_ = 1;
    p.seed_ = seed;
    p.zero_ = false;
    p.cache_ = std::make_shared<Cache>();
    p.cache_->nodes.resize(p.n_cells_ + 1);
    p.cache_->nodes[0] = 0.0;
    p.cache_->materialized.store(1, std::memory_order_release);
    return p;
}

BrownianPath BrownianPath::zero(double t0, double t1, double dt) {
    BrownianPath p = generate(t0, t1, dt, 0);
    p.zero_ = true;
    return p;
}

void BrownianPath::materialize_nodes(std::size_t i) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    std::size_t have = cache_->materialized.load(std::memory_order_acquire);
    if (i < have) return;
    // extend with some lookahead so sequential consumers lock rarely
    const std::size_t target = std::min(n_cells_ + 1, std::max(i + 1, have + 65536));
    const double sd = std::sqrt(dt_);
    double acc = cache_->nodes[have - 1];
    for (std::size_t j = have; j < target; ++j) {
        if (!zero_) acc += sd * keyed_normal(seed_ ^ kIncrementTag, static_cast<std::uint64_t>(j - 1));
        cache_->nodes[j] = acc;
    }
    cache_->materialized.store(target, std::memory_order_release);
}

double BrownianPath::node(std::size_t i) const {
    if (i >= cache_->nodes.size()) throw std::out_of_range("BrownianPath::node: index past t1");
    if (i >= cache_->materialized.load(std::memory_order_acquire)) materialize_nodes(i);
    return cache_->nodes[i];
}

double BrownianPath::midpoint_value(std::uint64_t tick) const {
    // tick has a nonzero fractional part; its depth is given by the lowest
    // set bit of that part.
    const std::uint64_t frac = tick & ((1ull << kFracBits) - 1);
    const std::uint64_t step = frac & (~frac + 1); // lowest set bit
    const std::uint64_t left = tick - step;
    const std::uint64_t right = tick + step;
    const double bl = value_at_tick(left);
    const double br = (right & ((1ull << kFracBits) - 1)) == 0
                          ? node(static_cast<std::size_t>(right >> kFracBits))
                          : value_at_tick(right);
    if (zero_) return 0.5 * (bl + br);
    // interval length dt * 2*step/2^32; bridge midpoint variance = len/4
    const double len = dt_ * static_cast<double>(2 * step) * 0x1.0p-32;
    const double xi = keyed_normal(seed_ ^ kBridgeTag, tick);
    return 0.5 * (bl + br) + 0.5 * std::sqrt(len) * xi;
}

double BrownianPath::value_at_tick(std::uint64_t tick) const {
    const std::uint64_t frac = tick & ((1ull << kFracBits) - 1);
    if (frac == 0) return node(static_cast<std::size_t>(tick >> kFracBits));
    {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        auto it = cache_->values.find(tick);
        if (it != cache_->values.end()) return it->second;
    }
    const double v = midpoint_value(tick);
    {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        cache_->values.emplace(tick, v);
    }
    return v;
}

std::uint64_t BrownianPath::tick_of(double t, int depth, bool strict) const {
    if (depth < 0 || depth > kMaxDepth) throw std::invalid_argument("tick_of: bad depth");
    const double rel = (t - t0_) / dt_;
    if (rel < -1e-9 || rel > static_cast<double>(n_cells_) + 1e-9)
        throw std::out_of_range("BrownianPath: time outside [t0, t1]");
    const double scaled = rel * static_cast<double>(1ull << depth);
    const double rounded = std::round(scaled);
    if (strict && std::abs(scaled - rounded) > 1e-6)
        throw std::invalid_argument("BrownianPath: off-grid query");
    std::uint64_t q = static_cast<std::uint64_t>(rounded < 0 ? 0.0 : rounded);
    const std::uint64_t max_q = static_cast<std::uint64_t>(n_cells_) << depth;
    if (q > max_q) q = max_q;
    return q << (kFracBits - static_cast<std::uint64_t>(depth));
}

double BrownianPath::time_of(std::uint64_t tick) const {
    const std::uint64_t cell = tick >> kFracBits;
    const std::uint64_t frac = tick & ((1ull << kFracBits) - 1);
    return t0_ + dt_ * (static_cast<double>(cell) + static_cast<double>(frac) * 0x1.0p-32);
}

double BrownianPath::value(double t, int snap_depth) const {
    return value_at_tick(tick_of(t, snap_depth, false));
}

double BrownianPath::increment_ticks(std::uint64_t s, std::uint64_t t) const {
    if (s > t) throw std::invalid_argument("BrownianPath::increment: need s <= t");
    return value_at_tick(t) - value_at_tick(s);
}

double BrownianPath::increment(double s, double t) const {
    return increment_ticks(tick_of(s, kMaxDepth, true), tick_of(t, kMaxDepth, true));
}

void BrownianPath::refine(double t_lo, double t_hi, double new_dt) {
    if (t_lo < t0_ - 1e-12 || t_hi > t1_ + 1e-9 + dt_)
        throw std::out_of_range("refine: window outside path span");
    const double ratio = dt_ / new_dt;
    const double lg = std::log2(ratio);
    const int m = static_cast<int>(std::round(lg));
    if (m < 0 || m > kMaxDepth || std::abs(lg - m) > 1e-9)
        throw std::invalid_argument("refine: new_dt must divide dt dyadically");
    if (m == 0) return;
    const std::uint64_t lo = tick_of(t_lo, m, false);
    const std::uint64_t hi = tick_of(t_hi, m, false);
    const std::uint64_t step = 1ull << (kFracBits - static_cast<std::uint64_t>(m));
    for (std::uint64_t tick = lo; tick <= hi; tick += step) value_at_tick(tick);
    if (m > refinement_level_) refinement_level_ = m;
}

void BrownianPath::dump(const std::string& file) const {
    std::FILE* f = std::fopen(file.c_str(), "wb");
    if (!f) throw std::runtime_error("BrownianPath::dump: cannot open " + file);
    const char magic[8] = {'S', 'A', 'O', 'P', 'A', 'T', 'H', '1'};
    std::uint64_t z = zero_ ? 1 : 0;
    bool ok = std::fwrite(magic, 1, 8, f) == 8 && std::fwrite(&t0_, 8, 1, f) == 1 &&
              std::fwrite(&t1_, 8, 1, f) == 1 && std::fwrite(&dt_, 8, 1, f) == 1 &&
              std::fwrite(&seed_, 8, 1, f) == 1 && std::fwrite(&z, 8, 1, f) == 1;
    std::fclose(f);
    if (!ok) throw std::runtime_error("BrownianPath::dump: short write to " + file);
}

BrownianPath BrownianPath::load(const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "rb");
    if (!f) throw std::runtime_error("BrownianPath::load: cannot open " + file);
    char magic[8];
    double t0, t1, dt;
    std::uint64_t seed, z;
    bool ok = std::fread(magic, 1, 8, f) == 8 && std::fread(&t0, 8, 1, f) == 1 &&
              std::fread(&t1, 8, 1, f) == 1 && std::fread(&dt, 8, 1, f) == 1 &&
              std::fread(&seed, 8, 1, f) == 1 && std::fread(&z, 8, 1, f) == 1;
    std::fclose(f);
    if (!ok || std::memcmp(magic, "SAOPATH1", 8) != 0)
        throw std::runtime_error("BrownianPath::load: bad file " + file);
    return z ? zero(t0, t1, dt) : generate(t0, t1, dt, seed);
}

} // namespace sao
