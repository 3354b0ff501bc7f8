#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "modesynth/errors.hpp"
#include "modesynth/matrix.hpp"
#include "modesynth/relu.hpp"
#include "modesynth/rng.hpp"
#include "modesynth/stats.hpp"

namespace modesynth {

enum class StatsSource { raw_input, stage2_activations };

struct MsmConfig {
    std::size_t epochs = 1;
    int quant_decimals = 2;
    NoiseMode noise_mode = NoiseMode::sample_stats;  // sample_stats or zero
    StatsSource stats_source = StatsSource::raw_input;
    int sparsity_exponent = 1;
    std::uint64_t seed = 0;
};

/// Working state of a Mode Synthesizing Machine run. Columns of the matrices
/// are the hierarchy units. err_second == |err_first| elementwise after every
/// epoch; error_history holds one summed second-point error per epoch.
struct MsmState {
    Matrix input;
    Matrix stage1;
    Matrix stage2;
    DataStats stats;
    bool stats_ready = false;
    Matrix reconstruction;
    Matrix err_first;
    Matrix err_second;
    std::vector<double> error_history;
};

namespace detail {

inline void check_msm_noise(NoiseMode mode) {
    if (mode == NoiseMode::standard_normal)
        throw InvalidRange("msm: noise_mode must be sample_stats or zero");
}

}  // namespace detail

/// Stage-1 affine linearization, elementwise 0.2*(1 + x) + 0.5*(1 - x).
/// Maps [0, 1] onto [0.4, 0.7], strictly decreasing.
inline Matrix linearize_stage1(const Matrix& input) {
    Matrix out(input.rows(), input.cols());
    for (std::size_t i = 0; i < input.size(); ++i) {
        const double x = input.values()[i];
        if (x < 0.0 || x > 1.0) throw OutOfRange("linearize_stage1: input must be in [0, 1]");
        out.values()[i] = 0.2 * (1.0 + x) + 0.5 * (1.0 - x);
    }
    return out;
}

/// Inverse of the stage-1 map, x = (0.7 - y) / 0.3. Unclamped.
inline Matrix stage1_inverse(const Matrix& stage1) {
    Matrix out(stage1.rows(), stage1.cols());
    for (std::size_t i = 0; i < stage1.size(); ++i)
        out.values()[i] = (0.7 - stage1.values()[i]) / 0.3;
    return out;
}

/// Stage-2 learning-unit activation: mrelu with the sample-mean cut-off over
/// the whole matrix, noise per cfg.noise_mode, exponent cfg.sparsity_exponent.
inline Matrix activate_stage2(const Matrix& stage1, const MsmConfig& cfg, RngStream& rng) {
    if (stage1.empty()) throw EmptyInput("activate_stage2: empty input");
    detail::check_msm_noise(cfg.noise_mode);
    MreluConfig mcfg;
    mcfg.sparsity_exponent = cfg.sparsity_exponent;
    mcfg.noise_mode = cfg.noise_mode;
    mcfg.cutoff_mode = CutoffMode::sample_mean;
    Matrix out(stage1.rows(), stage1.cols());
    out.values() = mrelu(stage1.values(), mcfg, rng);
    return out;
}

/// One epoch of columnar mode synthesis with the two-point error update.
///
/// Per column (ascending column order, which fixes the RNG consumption):
///   (a) column mode and its indices, quantized at cfg.quant_decimals;
///   (b) candidate vector: entry at 1-based row ro is mean + std * u with
///       u ~ uniform integer on [0, ro] (one draw per row, rows ascending);
///   (c) the mode value overwrites every mode index;
///   (d) permutation pass from the bottom row upward: for ro = rows .. 1,
///       swap entry ro-1 with entry draw_index(ro) (one draw per row,
///       including the identity swap at ro = 1);
///   (e) reconstruction column = result; first-point error = reconstruction -
///       stage2; second-point error = its absolute value.
/// The summed second-point error of the epoch is appended to error_history.
inline void synthesize_epoch(MsmState& state, const MsmConfig& cfg, RngStream& rng) {
    if (state.stage2.empty() || !state.stats_ready)
        throw StateNotInitialized("synthesize_epoch: stage2/stats not populated");
    const std::size_t rows = state.stage2.rows();
    const std::size_t cols = state.stage2.cols();
    if (state.reconstruction.empty()) {
        state.reconstruction = Matrix(rows, cols);
        state.err_first = Matrix(rows, cols);
        state.err_second = Matrix(rows, cols);
    }

    double epoch_error = 0.0;
    std::vector<double> candidate(rows);
    for (std::size_t co = 0; co < cols; ++co) {
        const std::vector<double> column = state.stage2.column(co);
        const ModeSummary mode = mode_with_indices(column, cfg.quant_decimals);

        for (std::size_t r = 0; r < rows; ++r) {
            const auto u = draw_uniform_int(rng, 0, static_cast<std::int64_t>(r) + 1);
            candidate[r] = state.stats.mean + state.stats.std * static_cast<double>(u);
        }
        for (std::size_t idx : mode.indices) candidate[idx] = mode.mode_value;
        for (std::size_t ro = rows; ro >= 1; --ro) {
            const auto q = static_cast<std::size_t>(draw_index(rng, static_cast<std::int64_t>(ro)));
            std::swap(candidate[ro - 1], candidate[q]);
        }

        for (std::size_t r = 0; r < rows; ++r) {
            const double diff = candidate[r] - column[r];
            state.reconstruction(r, co) = candidate[r];
            state.err_first(r, co) = diff;
            state.err_second(r, co) = std::abs(diff);
            epoch_error += state.err_second(r, co);
        }
    }
    state.error_history.push_back(epoch_error);
}

/// Full MSM run: stage-1 linearization, stage-2 activation, input statistics,
/// then cfg.epochs synthesis epochs, each on its own derived stream
/// (activation noise on stream 0, epoch e on stream 1 + e).
inline MsmState train(const Matrix& input, const MsmConfig& cfg) {
    if (cfg.epochs < 1) throw InvalidRange("msm::train: epochs must be >= 1");
    detail::check_msm_noise(cfg.noise_mode);

    MsmState state;
    state.input = input;
    state.stage1 = linearize_stage1(input);
    RngStream activation_rng(cfg.seed, 0);
    state.stage2 = activate_stage2(state.stage1, cfg, activation_rng);

    const std::vector<double>& basis = cfg.stats_source == StatsSource::raw_input
                                           ? state.input.values()
                                           : state.stage2.values();
    state.stats = detail::unit_stats(basis);
    state.stats_ready = true;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        RngStream epoch_rng(cfg.seed, 1 + epoch);
        synthesize_epoch(state, cfg, epoch_rng);
    }
    return state;
}

enum class ErrorMetric { sse, mae };

inline double reconstruction_error(const MsmState& state, ErrorMetric metric) {
    if (state.reconstruction.empty())
        throw StateNotInitialized("reconstruction_error: state not trained");
    return metric == ErrorMetric::sse ? metric_sse(state.reconstruction, state.stage2)
                                      : metric_mae(state.reconstruction, state.stage2);
}

}  // namespace modesynth
