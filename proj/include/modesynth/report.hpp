#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "modesynth/errors.hpp"
#include "modesynth/image.hpp"
#include "modesynth/msm.hpp"
#include "modesynth/rbm.hpp"

namespace modesynth {

enum class Approach { one, two };
enum class ModelKind { rbm, msm };
enum class CdMapping { gibbs_steps, epochs };

inline const char* to_string(Approach a) { return a == Approach::one ? "one" : "two"; }
inline const char* to_string(ModelKind m) { return m == ModelKind::rbm ? "rbm" : "msm"; }
inline const char* to_string(CdMapping c) {
    return c == CdMapping::gibbs_steps ? "gibbs_steps" : "epochs";
}
inline const char* to_string(NoiseMode n) {
    switch (n) {
        case NoiseMode::sample_stats: return "sample_stats";
        case NoiseMode::standard_normal: return "standard_normal";
        default: return "zero";
    }
}
inline const char* to_string(StatsSource s) {
    return s == StatsSource::raw_input ? "raw_input" : "stage2_activations";
}
inline const char* to_string(HiddenUnitKind k) {
    return k == HiddenUnitKind::linear_gaussian ? "linear_gaussian" : "binary_sigmoid";
}
inline const char* to_string(Polarity p) {
    return p == Polarity::dark_on_light ? "dark_on_light" : "light_on_dark";
}

/// One (model, CD level) result row aggregated over trials.
struct ReportRow {
    ModelKind model = ModelKind::rbm;
    int cd_level = 1;
    CdMapping cd_mapping = CdMapping::gibbs_steps;
    double metric_sse = 0.0;  // mean over trials
    double metric_mae = 0.0;
    std::size_t trials = 0;
    std::vector<double> per_trial_sse;
    std::vector<double> per_trial_mae;
    std::uint64_t seed = 0;
    std::int64_t runtime_ms = 0;
    std::string error;  // non-empty marks a failed row; metrics emit as null
};

/// Everything the runner was configured with, echoed verbatim into the report.
struct ConfigEcho {
    std::vector<int> cd_levels;
    std::size_t trials = 2;
    std::uint64_t seed = 0;
    std::string dump_dir;
    std::string artifact_prefix;
    // rbm
    std::size_t rbm_hidden = 64;
    std::size_t rbm_epochs = 1;
    CdMapping rbm_cd_mapping = CdMapping::gibbs_steps;
    double rbm_learning_rate = 0.001;
    double rbm_momentum = 0.5;
    double rbm_final_momentum = 0.9;
    std::size_t rbm_momentum_switch_epoch = 5;
    double rbm_weight_decay = 0.0002;
    double rbm_init_weight_sigma = 0.1;
    std::size_t rbm_num_chains = 1;
    HiddenUnitKind rbm_hidden_unit_kind = HiddenUnitKind::linear_gaussian;
    // msm
    CdMapping msm_cd_mapping = CdMapping::epochs;
    int msm_quant_decimals = 2;
    NoiseMode msm_noise_mode = NoiseMode::sample_stats;
    StatsSource msm_stats_source = StatsSource::raw_input;
    int msm_sparsity_exponent = 1;
    // roi
    double roi_threshold = 0.5;
    Polarity roi_polarity = Polarity::dark_on_light;
};

struct ExperimentReport {
    Approach approach = Approach::one;
    std::vector<ReportRow> rows;
    ConfigEcho config_echo;
    std::vector<std::string> artifact_paths;
};

namespace detail {

/// Canonical JSON fragments: keys sorted, floats at 17 significant digits.
inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

inline std::string json_number(double v) {
    if (!std::isfinite(v)) throw NonFiniteMetric("report: non-finite number");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string json_array(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += json_number(v[i]);
    }
    return out + "]";
}

inline std::string json_array(const std::vector<int>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out + "]";
}

inline std::string json_array(const std::vector<std::string>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += "\"" + json_escape(v[i]) + "\"";
    }
    return out + "]";
}

}  // namespace detail

/// Canonical serialization: object keys sorted at every level, floats with 17
/// significant digits, empty arrays as []. Byte-identical output for equal
/// reports.
inline std::string emit_report_string(const ExperimentReport& report) {
    using detail::json_array;
    using detail::json_escape;
    using detail::json_number;

    const ConfigEcho& c = report.config_echo;
    std::string out = "{";
    out += "\"approach\":\"" + std::string(to_string(report.approach)) + "\",";
    out += "\"artifact_paths\":" + json_array(report.artifact_paths) + ",";

    out += "\"config_echo\":{";
    out += "\"artifact_prefix\":\"" + json_escape(c.artifact_prefix) + "\",";
    out += "\"cd_levels\":" + json_array(c.cd_levels) + ",";
    out += "\"dump_dir\":\"" + json_escape(c.dump_dir) + "\",";
    out += "\"msm\":{";
    out += "\"cd_mapping\":\"" + std::string(to_string(c.msm_cd_mapping)) + "\",";
    out += "\"noise_mode\":\"" + std::string(to_string(c.msm_noise_mode)) + "\",";
    out += "\"quant_decimals\":" + std::to_string(c.msm_quant_decimals) + ",";
    out += "\"sparsity_exponent\":" + std::to_string(c.msm_sparsity_exponent) + ",";
    out += "\"stats_source\":\"" + std::string(to_string(c.msm_stats_source)) + "\"},";
    out += "\"rbm\":{";
    out += "\"cd_mapping\":\"" + std::string(to_string(c.rbm_cd_mapping)) + "\",";
    out += "\"epochs\":" + std::to_string(c.rbm_epochs) + ",";
    out += "\"final_momentum\":" + json_number(c.rbm_final_momentum) + ",";
    out += "\"hidden_unit_kind\":\"" + std::string(to_string(c.rbm_hidden_unit_kind)) + "\",";
    out += "\"init_weight_sigma\":" + json_number(c.rbm_init_weight_sigma) + ",";
    out += "\"learning_rate\":" + json_number(c.rbm_learning_rate) + ",";
    out += "\"momentum\":" + json_number(c.rbm_momentum) + ",";
    out += "\"momentum_switch_epoch\":" + std::to_string(c.rbm_momentum_switch_epoch) + ",";
    out += "\"num_chains\":" + std::to_string(c.rbm_num_chains) + ",";
    out += "\"num_hidden\":" + std::to_string(c.rbm_hidden) + ",";
    out += "\"weight_decay\":" + json_number(c.rbm_weight_decay) + "},";
    out += "\"roi\":{";
    out += "\"polarity\":\"" + std::string(to_string(c.roi_polarity)) + "\",";
    out += "\"threshold\":" + json_number(c.roi_threshold) + "},";
    out += "\"seed\":" + std::to_string(c.seed) + ",";
    out += "\"trials\":" + std::to_string(c.trials) + "},";

    out += "\"rows\":[";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const ReportRow& row = report.rows[i];
        if (i) out += ",";
        out += "{";
        out += "\"cd_level\":" + std::to_string(row.cd_level) + ",";
        out += "\"cd_mapping\":\"" + std::string(to_string(row.cd_mapping)) + "\",";
        out += "\"error\":\"" + json_escape(row.error) + "\",";
        if (row.error.empty()) {
            out += "\"metric_mae\":" + json_number(row.metric_mae) + ",";
            out += "\"metric_sse\":" + json_number(row.metric_sse) + ",";
        } else {
            out += "\"metric_mae\":null,\"metric_sse\":null,";
        }
        out += "\"model\":\"" + std::string(to_string(row.model)) + "\",";
        out += "\"per_trial_values\":{\"mae\":" + json_array(row.per_trial_mae) +
               ",\"sse\":" + json_array(row.per_trial_sse) + "},";
        out += "\"runtime_ms\":" + std::to_string(row.runtime_ms) + ",";
        out += "\"seed\":" + std::to_string(row.seed) + ",";
        out += "\"trials\":" + std::to_string(row.trials) + "}";
    }
    out += "],";
    out += "\"schema\":\"msm-report.v1\"}";
    return out;
}

inline void emit_report(const ExperimentReport& report, const std::filesystem::path& out_path) {
    const std::string text = emit_report_string(report);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("emit_report: cannot write " + out_path.string());
    out << text << "\n";
    if (!out) throw IoError("emit_report: write failed for " + out_path.string());
}

/// Canonical bytes with runtime fields zeroed; equal digests mean equal
/// reports up to timing.
inline std::string report_determinism_digest(const ExperimentReport& report) {
    ExperimentReport copy = report;
    for (auto& row : copy.rows) row.runtime_ms = 0;
    return emit_report_string(copy);
}

}  // namespace modesynth
