#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "modesynth/errors.hpp"
#include "modesynth/glyphs.hpp"
#include "modesynth/image.hpp"
#include "modesynth/msm.hpp"
#include "modesynth/rbm.hpp"
#include "modesynth/report.hpp"

namespace modesynth {

/// Tunables beyond the spec-level (input, cd_levels, trials, seed) arguments.
struct ExperimentOptions {
    std::size_t rbm_hidden = 64;  // 500 mirrors the reference setup; 64 is desk scale
    std::size_t rbm_epochs = 1;   // used when the RBM maps CD levels to Gibbs steps
    CdMapping rbm_cd_mapping = CdMapping::gibbs_steps;
    double rbm_learning_rate = 0.001;
    double rbm_momentum = 0.5;
    double rbm_final_momentum = 0.9;
    std::size_t rbm_momentum_switch_epoch = 5;
    double rbm_weight_decay = 0.0002;
    double rbm_init_weight_sigma = 0.1;
    std::size_t rbm_num_chains = 1;
    HiddenUnitKind rbm_hidden_unit_kind = HiddenUnitKind::linear_gaussian;
    int msm_quant_decimals = 2;
    NoiseMode msm_noise_mode = NoiseMode::sample_stats;
    StatsSource msm_stats_source = StatsSource::raw_input;
    int msm_sparsity_exponent = 1;
    double roi_threshold = 0.5;
    Polarity roi_polarity = Polarity::dark_on_light;
    std::string dump_dir;  // empty: no image dumps
};

namespace detail {

struct TrialOutput {
    Matrix reconstruction;
    Matrix reference;
};

/// Clamp to [0, 1] for PGM emission of out-of-range activations.
inline ImageGray clamped_image(const Matrix& m) {
    std::vector<double> pixels(m.values());
    for (double& p : pixels) p = std::min(1.0, std::max(0.0, p));
    return ImageGray::create(m.cols(), m.rows(), std::move(pixels));
}

/// Min-max rescale raw activations onto [0, 1] for a viewable PGM.
inline ImageGray normalized_image(const Matrix& m) {
    std::vector<double> pixels(m.values());
    const auto [lo_it, hi_it] = std::minmax_element(pixels.begin(), pixels.end());
    const double lo = *lo_it, hi = *hi_it;
    for (double& p : pixels) p = hi == lo ? 0.0 : (p - lo) / (hi - lo);
    return ImageGray::create(m.cols(), m.rows(), std::move(pixels));
}

inline TrialOutput run_msm_trial(const Matrix& data, int cd_level, std::uint64_t trial_seed,
                                 const ExperimentOptions& opts) {
    MsmConfig cfg;
    cfg.epochs = static_cast<std::size_t>(cd_level);
    cfg.quant_decimals = opts.msm_quant_decimals;
    cfg.noise_mode = opts.msm_noise_mode;
    cfg.stats_source = opts.msm_stats_source;
    cfg.sparsity_exponent = opts.msm_sparsity_exponent;
    cfg.seed = trial_seed;
    const MsmState state = train(data, cfg);
    return {state.reconstruction, state.stage2};
}

inline TrialOutput run_rbm_trial(const Matrix& data, int cd_level, std::uint64_t trial_seed,
                                 const ExperimentOptions& opts) {
    RbmTrainConfig cfg;
    cfg.num_hidden = opts.rbm_hidden;
    if (opts.rbm_cd_mapping == CdMapping::gibbs_steps) {
        cfg.cd_k = static_cast<std::size_t>(cd_level);
        cfg.epochs = opts.rbm_epochs;
    } else {
        cfg.cd_k = 1;
        cfg.epochs = static_cast<std::size_t>(cd_level);
    }
    cfg.learning_rate = opts.rbm_learning_rate;
    cfg.momentum = opts.rbm_momentum;
    cfg.final_momentum = opts.rbm_final_momentum;
    cfg.momentum_switch_epoch = opts.rbm_momentum_switch_epoch;
    cfg.weight_decay = opts.rbm_weight_decay;
    cfg.init_weight_sigma = opts.rbm_init_weight_sigma;
    cfg.num_chains = opts.rbm_num_chains;
    cfg.hidden_unit_kind = opts.rbm_hidden_unit_kind;
    cfg.seed = trial_seed;

    // The whole image is one training vector.
    Matrix flat(1, data.size());
    for (std::size_t i = 0; i < data.size(); ++i) flat(0, i) = data.values()[i];
    const RbmTrainResult trained = train_rbm(flat, cfg);

    // One hidden-sample -> visible-mean pass gives the reconstruction.
    RngStream recon_rng(trial_seed, 3);
    std::vector<double> v(flat.values());
    const UnitActivation hidden =
        hidden_given_visible(trained.params, v, cfg.hidden_unit_kind, recon_rng);
    const UnitActivation visible = visible_given_hidden(trained.params, hidden.sample, recon_rng);

    Matrix recon(data.rows(), data.cols());
    recon.values() = visible.mean;
    return {recon, data};
}

inline std::string artifact_base(const ConfigEcho& echo, ModelKind model, int level,
                                 std::size_t trial) {
    return echo.dump_dir + "/" + echo.artifact_prefix + "_" + to_string(model) + "_cd" +
           std::to_string(level) + "_t" + std::to_string(trial);
}

inline ExperimentReport run_protocol(Approach approach, const ImageGray& prepared,
                                     const std::set<int>& cd_levels, std::size_t trials,
                                     std::uint64_t seed, const ExperimentOptions& opts) {
    if (trials < 2) throw InvalidRange("experiment: trials must be >= 2");
    if (cd_levels.empty()) throw InvalidRange("experiment: need at least one CD level");
    for (int level : cd_levels)
        if (level < 1) throw InvalidRange("experiment: CD levels must be >= 1");

    ExperimentReport report;
    report.approach = approach;
    ConfigEcho& echo = report.config_echo;
    echo.cd_levels.assign(cd_levels.begin(), cd_levels.end());
    echo.trials = trials;
    echo.seed = seed;
    echo.dump_dir = opts.dump_dir;
    echo.artifact_prefix = approach == Approach::one ? "a1" : "a2";
    echo.rbm_hidden = opts.rbm_hidden;
    echo.rbm_epochs = opts.rbm_epochs;
    echo.rbm_cd_mapping = opts.rbm_cd_mapping;
    echo.rbm_learning_rate = opts.rbm_learning_rate;
    echo.rbm_momentum = opts.rbm_momentum;
    echo.rbm_final_momentum = opts.rbm_final_momentum;
    echo.rbm_momentum_switch_epoch = opts.rbm_momentum_switch_epoch;
    echo.rbm_weight_decay = opts.rbm_weight_decay;
    echo.rbm_init_weight_sigma = opts.rbm_init_weight_sigma;
    echo.rbm_num_chains = opts.rbm_num_chains;
    echo.rbm_hidden_unit_kind = opts.rbm_hidden_unit_kind;
    echo.msm_quant_decimals = opts.msm_quant_decimals;
    echo.msm_noise_mode = opts.msm_noise_mode;
    echo.msm_stats_source = opts.msm_stats_source;
    echo.msm_sparsity_exponent = opts.msm_sparsity_exponent;
    echo.roi_threshold = opts.roi_threshold;
    echo.roi_polarity = opts.roi_polarity;

    const bool dumping = !opts.dump_dir.empty();
    if (dumping) {
        std::filesystem::create_directories(opts.dump_dir);
        const std::string input_path = opts.dump_dir + "/" + echo.artifact_prefix + "_input.pgm";
        save_image(prepared, input_path, ImageFormat::pgm_ascii);
        report.artifact_paths.push_back(input_path);
    }

    const Matrix data = image_to_matrix(prepared);

    for (ModelKind model : {ModelKind::rbm, ModelKind::msm}) {
        for (int level : cd_levels) {
            ReportRow row;
            row.model = model;
            row.cd_level = level;
            row.cd_mapping =
                model == ModelKind::rbm ? opts.rbm_cd_mapping : CdMapping::epochs;
            row.trials = trials;
            row.seed = seed;
            const auto start = std::chrono::steady_clock::now();
            try {
                for (std::size_t t = 0; t < trials; ++t) {
                    const std::uint64_t trial_seed = seed + t;
                    const TrialOutput out = model == ModelKind::msm
                                                ? run_msm_trial(data, level, trial_seed, opts)
                                                : run_rbm_trial(data, level, trial_seed, opts);
                    row.per_trial_sse.push_back(metric_sse(out.reconstruction, out.reference));
                    row.per_trial_mae.push_back(metric_mae(out.reconstruction, out.reference));

                    if (dumping) {
                        const std::string base = artifact_base(echo, model, level, t);
                        save_matrix_csv(out.reconstruction, base + "_recon.csv");
                        save_matrix_csv(out.reference, base + "_ref.csv");
                        report.artifact_paths.push_back(base + "_recon.csv");
                        report.artifact_paths.push_back(base + "_ref.csv");
                        if (model == ModelKind::msm) {
                            // Input-space view via the stage-1 inverse, plus a
                            // min-max normalized raw view (activations exceed
                            // the PGM range).
                            save_image(clamped_image(stage1_inverse(out.reconstruction)),
                                       base + "_recon_input.pgm", ImageFormat::pgm_ascii);
                            save_image(normalized_image(out.reconstruction),
                                       base + "_recon_raw.pgm", ImageFormat::pgm_ascii);
                            report.artifact_paths.push_back(base + "_recon_input.pgm");
                            report.artifact_paths.push_back(base + "_recon_raw.pgm");
                        } else {
                            save_image(clamped_image(out.reconstruction), base + "_recon.pgm",
                                       ImageFormat::pgm_ascii);
                            report.artifact_paths.push_back(base + "_recon.pgm");
                        }
                    }
                }
                double sse_sum = 0.0, mae_sum = 0.0;
                for (double v : row.per_trial_sse) sse_sum += v;
                for (double v : row.per_trial_mae) mae_sum += v;
                row.metric_sse = sse_sum / static_cast<double>(trials);
                row.metric_mae = mae_sum / static_cast<double>(trials);
            } catch (const Error& e) {
                row.error = e.what();
            }
            row.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

}  // namespace detail

/// Approach 1: single dialect. The input is ROI-cropped, then the RBM and the
/// MSM run at every CD level for the requested trials.
inline ExperimentReport run_approach1(const ImageGray& input, const std::set<int>& cd_levels,
                                      std::size_t trials, std::uint64_t seed,
                                      const ExperimentOptions& opts = {}) {
    const ImageGray roi = roi_extract(input, opts.roi_threshold, opts.roi_polarity);
    return detail::run_protocol(Approach::one, roi, cd_levels, trials, seed, opts);
}

/// Approach 2: mixed dialects. Each input is ROI-cropped, the crops are
/// concatenated horizontally, and the same protocol runs on the mix.
inline ExperimentReport run_approach2(const std::vector<ImageGray>& inputs,
                                      const std::set<int>& cd_levels, std::size_t trials,
                                      std::uint64_t seed, const ExperimentOptions& opts = {}) {
    if (inputs.size() < 2) throw InsufficientSamples("run_approach2: need >= 2 images");
    std::vector<DialectSample> samples;
    samples.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        DialectSample s;
        s.label = "input-" + std::to_string(i);
        s.source_id = "cli";
        s.image = roi_extract(inputs[i], opts.roi_threshold, opts.roi_polarity);
        samples.push_back(std::move(s));
    }
    const ImageGray mixed = concat_sequence(samples);
    return detail::run_protocol(Approach::two, mixed, cd_levels, trials, seed, opts);
}

struct AuditResult {
    bool ok = true;
    std::string message = "audit clean";
};

/// Self-audit: recompute every successful row's metrics from the persisted
/// reconstruction/reference CSV matrices and compare against the report.
inline AuditResult audit_report(const std::filesystem::path& report_path) {
    std::ifstream in(report_path);
    if (!in) throw IoError("audit_report: cannot open " + report_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("audit_report: " + std::string(e.what()));
    }

    const std::string dump_dir = j.at("config_echo").at("dump_dir").get<std::string>();
    const std::string prefix = j.at("config_echo").at("artifact_prefix").get<std::string>();
    if (dump_dir.empty()) return {false, "audit needs a report produced with image dumps"};

    for (const auto& row : j.at("rows")) {
        if (!row.at("error").get<std::string>().empty()) continue;
        const std::string model = row.at("model").get<std::string>();
        const int level = row.at("cd_level").get<int>();
        const auto trials = row.at("trials").get<std::size_t>();
        const auto sse = row.at("per_trial_values").at("sse").get<std::vector<double>>();
        const auto mae = row.at("per_trial_values").at("mae").get<std::vector<double>>();
        if (sse.size() != trials || mae.size() != trials)
            return {false, "per-trial array length mismatch"};

        double sse_sum = 0.0, mae_sum = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const std::string base = dump_dir + "/" + prefix + "_" + model + "_cd" +
                                     std::to_string(level) + "_t" + std::to_string(t);
            const Matrix recon = load_matrix_csv(base + "_recon.csv");
            const Matrix ref = load_matrix_csv(base + "_ref.csv");
            const double sse_re = metric_sse(recon, ref);
            const double mae_re = metric_mae(recon, ref);
            if (std::abs(sse_re - sse[t]) > 1e-9 * (1.0 + std::abs(sse[t])))
                return {false, "sse mismatch at " + base};
            if (std::abs(mae_re - mae[t]) > 1e-9 * (1.0 + std::abs(mae[t])))
                return {false, "mae mismatch at " + base};
            sse_sum += sse_re;
            mae_sum += mae_re;
        }
        if (std::abs(sse_sum / trials - row.at("metric_sse").get<double>()) > 1e-9)
            return {false, "row sse aggregate mismatch"};
        if (std::abs(mae_sum / trials - row.at("metric_mae").get<double>()) > 1e-9)
            return {false, "row mae aggregate mismatch"};
    }
    return {};
}

}  // namespace modesynth
