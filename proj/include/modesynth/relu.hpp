#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "modesynth/errors.hpp"
#include "modesynth/rng.hpp"
#include "modesynth/stats.hpp"

namespace modesynth {

enum class NoiseMode { sample_stats, standard_normal, zero };
enum class CutoffMode { zero, sample_mean };

struct MreluConfig {
    int sparsity_exponent = 1;  // in [1, 100]
    NoiseMode noise_mode = NoiseMode::sample_stats;
    CutoffMode cutoff_mode = CutoffMode::sample_mean;
};

namespace detail {

/// x^n by repeated multiplication so that n = 1 returns x bit-exactly.
inline double pow_int(double x, int n) {
    double out = x;
    for (int i = 1; i < n; ++i) out *= x;
    return out;
}

/// Sample statistics for the learning units: sample divisor for length >= 2,
/// population for a single element (variance 0). Keeps 1x1 inputs usable.
inline DataStats unit_stats(std::span<const double> x) {
    return stats(x, x.size() >= 2 ? DivisorConvention::sample : DivisorConvention::population);
}

}  // namespace detail

/// Classic rectified linear unit: y_i = max(0, x_i + eps_i).
/// standard_normal draws eps_i ~ N(0, 1); zero applies no noise.
inline std::vector<double> relu_classic(std::span<const double> x, RngStream& rng,
                                        NoiseMode noise_mode) {
    if (x.empty()) throw EmptyInput("relu_classic: empty input");
    if (noise_mode == NoiseMode::sample_stats)
        throw InvalidRange("relu_classic: noise must be standard_normal or zero");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double eps = noise_mode == NoiseMode::standard_normal
                               ? draw_gaussian(rng, 0.0, 1.0)
                               : 0.0;
        out[i] = std::max(0.0, x[i] + eps);
    }
    return out;
}

struct MreluResult {
    std::vector<double> pre_exponent;  // max(cut, x_i + eps_i), before the sparsity exponent
    std::vector<double> output;
};

/// Modified rectified linear unit. With cutoff_mode sample_mean the cut-off is
/// the sample mean m of x, the noise is N(m, s^2) from the sample statistics,
/// and the result is raised to the sparsity exponent:
///
///   y_i = (max(m, x_i + eps_i))^n
///
/// noise_mode zero collapses the noise to its mean: eps_i = m exactly.
/// Inputs must be elementwise >= 0 under the sample_mean cut-off so that even
/// exponents cannot flip signs.
inline MreluResult mrelu_detailed(std::span<const double> x, const MreluConfig& cfg,
                                  RngStream& rng) {
    if (x.empty()) throw EmptyInput("mrelu: empty input");
    if (cfg.sparsity_exponent < 1 || cfg.sparsity_exponent > 100)
        throw InvalidRange("mrelu: sparsity_exponent must be in [1, 100]");
    if (cfg.cutoff_mode == CutoffMode::sample_mean)
        for (double v : x)
            if (v < 0.0) throw NegativeInput("mrelu: sample_mean cut-off needs x >= 0");

    const DataStats st = detail::unit_stats(x);
    const double cut = cfg.cutoff_mode == CutoffMode::sample_mean ? st.mean : 0.0;

    MreluResult res;
    res.pre_exponent.resize(x.size());
    res.output.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double eps;
        switch (cfg.noise_mode) {
            case NoiseMode::sample_stats:
                eps = draw_gaussian(rng, st.mean, st.variance());
                break;
            case NoiseMode::standard_normal:
                eps = draw_gaussian(rng, 0.0, 1.0);
                break;
            case NoiseMode::zero:
            default:
                eps = st.mean;
                break;
        }
        res.pre_exponent[i] = std::max(cut, x[i] + eps);
        res.output[i] = detail::pow_int(res.pre_exponent[i], cfg.sparsity_exponent);
    }
    return res;
}

inline std::vector<double> mrelu(std::span<const double> x, const MreluConfig& cfg,
                                 RngStream& rng) {
    return mrelu_detailed(x, cfg, rng).output;
}

inline std::vector<double> mrelu(const std::vector<double>& x, const MreluConfig& cfg,
                                 RngStream& rng) {
    return mrelu_detailed(std::span<const double>(x), cfg, rng).output;
}

}  // namespace modesynth
