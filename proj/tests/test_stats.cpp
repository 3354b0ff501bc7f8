#include "modesynth/stats.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "modesynth/rng.hpp"

using namespace modesynth;

namespace {

// Brute-force mode oracle, independent of the library path: quantize every
// element on its own, count each distinct key with a linear scan, take the
// highest count and the smallest key on ties.
struct OracleMode {
    double value;
    std::vector<std::size_t> indices;
};

OracleMode mode_oracle(const std::vector<double>& v, int decimals) {
    const double scale = std::pow(10.0, decimals);
    std::vector<std::int64_t> keys;
    keys.reserve(v.size());
    for (double x : v) keys.push_back(std::llround(x * scale));

    std::int64_t best_key = 0;
    std::size_t best_count = 0;
    bool have = false;
    for (std::int64_t k : keys) {
        const auto count = static_cast<std::size_t>(std::count(keys.begin(), keys.end(), k));
        if (!have || count > best_count || (count == best_count && k < best_key)) {
            best_key = k;
            best_count = count;
            have = true;
        }
    }
    OracleMode out;
    out.value = static_cast<double>(best_key) / scale;
    for (std::size_t i = 0; i < keys.size(); ++i)
        if (keys[i] == best_key) out.indices.push_back(i);
    return out;
}

}  // namespace

TEST(Stats, SampleExamples) {
    const DataStats s = stats(std::vector<double>{1, 2, 3}, DivisorConvention::sample);
    EXPECT_DOUBLE_EQ(s.mean, 2.0);
    EXPECT_DOUBLE_EQ(s.std, 1.0);
}

TEST(Stats, ConstantVectorHasExactlyZeroStd) {
    for (auto convention : {DivisorConvention::sample, DivisorConvention::population}) {
        const DataStats s = stats(std::vector<double>{5, 5, 5, 5}, convention);
        EXPECT_EQ(s.mean, 5.0);
        EXPECT_EQ(s.std, 0.0);
    }
    // Values whose mean is inexact in floating point still short-circuit.
    const DataStats t = stats(std::vector<double>{0.1, 0.1, 0.1}, DivisorConvention::sample);
    EXPECT_EQ(t.mean, 0.1);
    EXPECT_EQ(t.std, 0.0);
}

TEST(Stats, PopulationExample) {
    const DataStats s = stats(std::vector<double>{1, 2, 3}, DivisorConvention::population);
    EXPECT_NEAR(s.std, std::sqrt(2.0 / 3.0), 1e-9);
}

TEST(Stats, Errors) {
    EXPECT_THROW(stats(std::vector<double>{}), EmptyInput);
    EXPECT_THROW(stats(std::vector<double>{1.0}, DivisorConvention::sample), InsufficientData);
    EXPECT_NO_THROW(stats(std::vector<double>{1.0}, DivisorConvention::population));
}

TEST(Stats, ShiftAndScaleProperties) {
    RngStream rng(31, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(draw_uniform_int(rng, 2, 40));
        std::vector<double> v(n);
        for (auto& x : v) x = draw_gaussian(rng, 0.0, 4.0);
        const double c = draw_gaussian(rng, 0.0, 9.0);
        const double k = draw_gaussian(rng, 0.0, 4.0);

        std::vector<double> shifted(n), scaled(n);
        for (std::size_t i = 0; i < n; ++i) {
            shifted[i] = v[i] + c;
            scaled[i] = v[i] * k;
        }
        const DataStats base = stats(v);
        const DataStats sh = stats(shifted);
        const DataStats sc = stats(scaled);

        const double tol = 1e-10 * (1.0 + std::abs(base.mean) + std::abs(c));
        ASSERT_NEAR(sh.mean, base.mean + c, tol);
        ASSERT_NEAR(sh.std, base.std, 1e-10 * (1.0 + base.std));
        ASSERT_NEAR(sc.std, base.std * std::abs(k), 1e-10 * (1.0 + base.std * std::abs(k)));
    }
}

TEST(ModeWithIndices, RoundingExample) {
    const ModeSummary m = mode_with_indices(std::vector<double>{0.21, 0.52, 0.49, 0.87}, 1);
    EXPECT_DOUBLE_EQ(m.mode_value, 0.5);
    EXPECT_EQ(m.indices, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(m.count(), 2u);
}

TEST(ModeWithIndices, ConstantVector) {
    const ModeSummary m = mode_with_indices(std::vector<double>{7, 7, 7}, 0);
    EXPECT_DOUBLE_EQ(m.mode_value, 7.0);
    EXPECT_EQ(m.indices, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(ModeWithIndices, HalfAwayFromZeroRounding) {
    // 0.25 at 1 decimal rounds away from zero to 0.3, -0.25 to -0.3.
    const ModeSummary pos = mode_with_indices(std::vector<double>{0.25}, 1);
    EXPECT_DOUBLE_EQ(pos.mode_value, 0.3);
    const ModeSummary neg = mode_with_indices(std::vector<double>{-0.25}, 1);
    EXPECT_DOUBLE_EQ(neg.mode_value, -0.3);
}

TEST(ModeWithIndices, TieBreaksToSmallestValue) {
    const ModeSummary m = mode_with_indices(std::vector<double>{2.0, 1.0, 2.0, 1.0}, 0);
    EXPECT_DOUBLE_EQ(m.mode_value, 1.0);
    EXPECT_EQ(m.indices, (std::vector<std::size_t>{1, 3}));
}

TEST(ModeWithIndices, Errors) {
    EXPECT_THROW(mode_with_indices(std::vector<double>{}, 2), EmptyInput);
    EXPECT_THROW(mode_with_indices(std::vector<double>{1.0}, -1), InvalidRange);
    EXPECT_THROW(mode_with_indices(std::vector<double>{1.0}, 13), InvalidRange);
}

TEST(ModeWithIndices, MatchesOracleOnRandomVectors) {
    RngStream rng(41, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(draw_uniform_int(rng, 1, 50));
        const int decimals = static_cast<int>(draw_uniform_int(rng, 0, 3));
        std::vector<double> v(n);
        for (auto& x : v) x = draw_gaussian(rng, 0.0, 1.0);

        const ModeSummary got = mode_with_indices(v, decimals);
        const OracleMode want = mode_oracle(v, decimals);
        ASSERT_EQ(got.mode_value, want.value) << "trial " << trial;
        ASSERT_EQ(got.indices, want.indices) << "trial " << trial;
    }
}

TEST(ModeWithIndices, ExhaustiveSmallAlphabet) {
    // Every sequence of length 1..8 over a 4-symbol alphabet, exact match
    // against the counting oracle.
    const std::array<double, 4> alphabet{-0.3, 0.1, 0.2, 1.0};
    for (std::size_t len = 1; len <= 8; ++len) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < len; ++i) total *= alphabet.size();
        for (std::size_t code = 0; code < total; ++code) {
            std::vector<double> v(len);
            std::size_t rest = code;
            for (std::size_t i = 0; i < len; ++i) {
                v[i] = alphabet[rest % alphabet.size()];
                rest /= alphabet.size();
            }
            const ModeSummary got = mode_with_indices(v, 1);
            const OracleMode want = mode_oracle(v, 1);
            ASSERT_EQ(got.mode_value, want.value);
            ASSERT_EQ(got.indices, want.indices);
        }
    }
}

TEST(Metrics, TrivialValues) {
    const Matrix a = Matrix::from_values(1, 2, {1, 2});
    const Matrix b = Matrix::from_values(1, 2, {0, 0});
    EXPECT_DOUBLE_EQ(metric_sse(a, a), 0.0);
    EXPECT_DOUBLE_EQ(metric_sse(a, b), 5.0);

    const Matrix c = Matrix::from_values(1, 2, {1, -1});
    EXPECT_DOUBLE_EQ(metric_mae(c, c), 0.0);
    EXPECT_DOUBLE_EQ(metric_mae(c, b), 1.0);
}

TEST(Metrics, ShapeMismatchThrows) {
    const Matrix a(2, 3);
    const Matrix b(3, 2);
    EXPECT_THROW(metric_sse(a, b), ShapeMismatch);
    EXPECT_THROW(metric_mae(a, b), ShapeMismatch);
}

TEST(Metrics, MatchNaiveLoopOracle) {
    RngStream rng(53, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rows = static_cast<std::size_t>(draw_uniform_int(rng, 1, 12));
        const auto cols = static_cast<std::size_t>(draw_uniform_int(rng, 1, 12));
        Matrix a(rows, cols), b(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                a(r, c) = draw_gaussian(rng, 0.0, 4.0);
                b(r, c) = draw_gaussian(rng, 0.0, 4.0);
            }

        double sse = 0.0, abs_sum = 0.0;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                sse += (a(r, c) - b(r, c)) * (a(r, c) - b(r, c));
                abs_sum += std::abs(a(r, c) - b(r, c));
            }
        const double mae = abs_sum / static_cast<double>(rows * cols);

        ASSERT_NEAR(metric_sse(a, b), sse, 1e-12 * (1.0 + sse));
        ASSERT_NEAR(metric_mae(a, b), mae, 1e-12 * (1.0 + mae));
        ASSERT_GE(metric_sse(a, b), 0.0);
        ASSERT_GE(metric_mae(a, b), 0.0);
    }
}

TEST(Metrics, ZeroIffEqual) {
    const Matrix a = Matrix::from_values(2, 2, {1, 2, 3, 4});
    Matrix b = a;
    EXPECT_EQ(metric_sse(a, b), 0.0);
    b(1, 1) += 1e-9;
    EXPECT_GT(metric_sse(a, b), 0.0);
    EXPECT_GT(metric_mae(a, b), 0.0);
}

TEST(MatrixType, CheckedConstruction) {
    EXPECT_THROW(Matrix::from_values(2, 2, {1, 2, 3}), ShapeMismatch);
    EXPECT_THROW(Matrix::from_values(1, 2, {1, std::nan("")}), OutOfRange);
    EXPECT_THROW(Matrix::from_values(1, 1, {INFINITY}), OutOfRange);
}
