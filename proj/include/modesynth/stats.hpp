#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <span>
#include <vector>

#include "modesynth/errors.hpp"
#include "modesynth/matrix.hpp"

namespace modesynth {

enum class DivisorConvention { population, sample };

/// Mean and standard deviation of a sample. std == 0 iff all values equal.
struct DataStats {
    double mean = 0.0;
    double std = 0.0;
    DivisorConvention divisor_convention = DivisorConvention::sample;

    double variance() const { return std * std; }
};

/// Arithmetic mean and standard deviation. Default divisor is N-1 (sample);
/// population divides by N. All-equal input short-circuits to std = 0 exactly,
/// which the general path cannot guarantee in floating point.
inline DataStats stats(std::span<const double> v,
                       DivisorConvention convention = DivisorConvention::sample) {
    if (v.empty()) throw EmptyInput("stats: empty input");
    if (convention == DivisorConvention::sample && v.size() < 2)
        throw InsufficientData("stats: sample convention needs length >= 2");

    bool all_equal = true;
    for (double x : v)
        if (x != v[0]) { all_equal = false; break; }
    if (all_equal) return DataStats{v[0], 0.0, convention};

    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());

    double sq = 0.0;
    for (double x : v) sq += (x - mean) * (x - mean);
    const double divisor = convention == DivisorConvention::sample
                               ? static_cast<double>(v.size() - 1)
                               : static_cast<double>(v.size());
    return DataStats{mean, std::sqrt(sq / divisor), convention};
}

inline DataStats stats(const std::vector<double>& v,
                       DivisorConvention convention = DivisorConvention::sample) {
    return stats(std::span<const double>(v), convention);
}

/// Round half away from zero at `decimals` places, as an integer key on the
/// 10^-decimals grid. decimals <= 12 keeps the scale exactly representable.
inline std::int64_t quantize_key(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::llround(v * scale);  // llround rounds halves away from zero
}

/// The quantized value itself (key / 10^decimals).
inline double quantize_value(double v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return static_cast<double>(quantize_key(v, decimals)) / scale;
}

/// Most frequent quantized value of a sequence plus every index where it
/// occurs. Ties break to the smallest quantized value.
struct ModeSummary {
    double mode_value = 0.0;
    std::vector<std::size_t> indices;  // sorted ascending
    int quant_decimals = 0;

    std::size_t count() const { return indices.size(); }
};

inline ModeSummary mode_with_indices(std::span<const double> v, int quant_decimals) {
    if (v.empty()) throw EmptyInput("mode_with_indices: empty input");
    if (quant_decimals < 0 || quant_decimals > 12)
        throw InvalidRange("mode_with_indices: quant_decimals must be in [0, 12]");

    std::map<std::int64_t, std::size_t> freq;
    for (double x : v) ++freq[quantize_key(x, quant_decimals)];

    // std::map iterates keys ascending, so on equal counts the smallest
    // quantized value is kept.
    std::int64_t best_key = 0;
    std::size_t best_count = 0;
    for (const auto& [key, count] : freq) {
        if (count > best_count) {
            best_key = key;
            best_count = count;
        }
    }

    ModeSummary summary;
    summary.quant_decimals = quant_decimals;
    const double scale = std::pow(10.0, quant_decimals);
    summary.mode_value = static_cast<double>(best_key) / scale;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (quantize_key(v[i], quant_decimals) == best_key) summary.indices.push_back(i);
    return summary;
}

inline ModeSummary mode_with_indices(const std::vector<double>& v, int quant_decimals) {
    return mode_with_indices(std::span<const double>(v), quant_decimals);
}

/// Sum of squared elementwise differences.
inline double metric_sse(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "metric_sse");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        sum += d * d;
    }
    return sum;
}

/// Mean absolute elementwise difference.
inline double metric_mae(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "metric_mae");
    if (a.empty()) throw EmptyInput("metric_mae: empty matrices");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += std::abs(a.values()[i] - b.values()[i]);
    return sum / static_cast<double>(a.size());
}

}  // namespace modesynth
