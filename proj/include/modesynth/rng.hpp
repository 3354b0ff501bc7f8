#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "modesynth/errors.hpp"

namespace modesynth {

/// Deterministic random stream. The engine (std::mt19937_64) is bit-specified
/// by the C++ standard; the distributions below are hand-rolled on top of raw
/// engine words so that draw sequences are identical on every toolchain.
/// Identical (seed, stream_id) pairs always produce identical sequences.
///
/// A stream must be owned by exactly one thread at a time.
class RngStream {
public:
    static constexpr std::string_view kAlgorithmId = "msm.mt19937_64.v1";

    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{
            static_cast<std::uint32_t>(seed),
            static_cast<std::uint32_t>(seed >> 32),
            static_cast<std::uint32_t>(stream_id),
            static_cast<std::uint32_t>(stream_id >> 32),
        };
        engine_.seed(seq);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::string_view algorithm_id() const { return kAlgorithmId; }

    /// Independent stream derived from the same seed.
    RngStream substream(std::uint64_t stream_id) const { return RngStream(seed_, stream_id); }

    /// Raw 64-bit engine word.
    std::uint64_t next_word() { return engine_(); }

    /// Uniform real in [0, 1), 53-bit resolution.
    double draw_unit_real() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

/// Uniform integer on [lo, hi], both ends inclusive. Unbiased via masked
/// rejection: draws engine words until one lands inside the range.
inline std::int64_t draw_uniform_int(RngStream& rng, std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw InvalidRange("draw_uniform_int: lo > hi");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == 0) return lo;
    std::uint64_t mask = span;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    std::uint64_t draw;
    do {
        draw = rng.next_word() & mask;
    } while (draw > span);
    return lo + static_cast<std::int64_t>(draw);
}

/// Uniform index in [0, n-1].
inline std::int64_t draw_index(RngStream& rng, std::int64_t n) {
    if (n < 1) throw InvalidRange("draw_index: n must be >= 1");
    return draw_uniform_int(rng, 0, n - 1);
}

/// Sample from N(mean, variance). Basic Box-Muller, one output per call,
/// always consuming exactly two engine words. Variance 0 returns the mean
/// exactly and consumes nothing.
inline double draw_gaussian(RngStream& rng, double mean, double variance) {
    if (variance < 0.0) throw InvalidVariance();
    if (variance == 0.0) return mean;
    const double u1 = 1.0 - rng.draw_unit_real();  // (0, 1]
    const double u2 = rng.draw_unit_real();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    return mean + std::sqrt(variance) * z;
}

/// Bernoulli(p) as 0/1.
inline int draw_bernoulli(RngStream& rng, double p) {
    return rng.draw_unit_real() < p ? 1 : 0;
}

/// In-place uniform shuffle. Fisher-Yates from the tail: one draw_index call
/// per position i = n-1 .. 1.
template <typename T>
void shuffle_in_place(RngStream& rng, std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(draw_index(rng, static_cast<std::int64_t>(i)));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace modesynth
