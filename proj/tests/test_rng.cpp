#include "modesynth/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

using namespace modesynth;

// Upper 0.001 tail of the chi-square distribution; exceeding it rejects
// uniformity at p < 0.001.
constexpr double kChiSq9Dof999 = 27.877;
constexpr double kChiSq3Dof999 = 16.266;

TEST(RngStream, GeneratorStability) {
    // Frozen draws for (seed 42, stream 0). These pin the generator algorithm
    // for the repo lifetime; a change here is a breaking change.
    RngStream r(42, 0);
    EXPECT_EQ(r.next_word(), 9033786554787212662ull);
    EXPECT_EQ(r.next_word(), 7806919203930340588ull);
    EXPECT_EQ(r.next_word(), 16572419257921891740ull);

    RngStream u(42, 0);
    EXPECT_EQ(draw_uniform_int(u, 0, 9), 6);
    EXPECT_EQ(draw_uniform_int(u, 0, 9), 4);
    EXPECT_EQ(draw_uniform_int(u, 0, 9), 7);

    RngStream g(42, 0);
    EXPECT_DOUBLE_EQ(draw_gaussian(g, 0.0, 1.0), -1.0275932181387348);

    RngStream s(7, 3);
    EXPECT_EQ(draw_index(s, 5), 3);
    EXPECT_EQ(draw_index(s, 5), 4);
}

TEST(RngStream, IdenticalStreamsProduceIdenticalSequences) {
    RngStream a(123, 9);
    RngStream b(123, 9);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(draw_uniform_int(a, -50, 50), draw_uniform_int(b, -50, 50));
    }
    EXPECT_EQ(a.algorithm_id(), RngStream::kAlgorithmId);
}

TEST(RngStream, DistinctStreamIdsDiverge) {
    RngStream a(123, 0);
    RngStream b(123, 1);
    int differences = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_word() != b.next_word()) ++differences;
    EXPECT_GT(differences, 0);
}

TEST(DrawUniformInt, DegenerateRange) {
    RngStream rng(1);
    EXPECT_EQ(draw_uniform_int(rng, 3, 3), 3);
}

TEST(DrawUniformInt, InvalidRangeThrows) {
    RngStream rng(1);
    EXPECT_THROW(draw_uniform_int(rng, 4, 3), InvalidRange);
}

TEST(DrawUniformInt, ChiSquareUniformity) {
    RngStream rng(2024, 0);
    constexpr int kDraws = 100000;
    constexpr double kExpected = kDraws / 10.0;
    std::array<int, 10> buckets{};
    for (int i = 0; i < kDraws; ++i) ++buckets[draw_uniform_int(rng, 0, 9)];

    double chisq = 0.0;
    const double sigma = std::sqrt(kDraws * 0.1 * 0.9);
    for (int count : buckets) {
        EXPECT_NEAR(count, kExpected, 3.0 * sigma);
        chisq += (count - kExpected) * (count - kExpected) / kExpected;
    }
    EXPECT_LT(chisq, kChiSq9Dof999);
}

TEST(DrawGaussian, ZeroVarianceIsExactMean) {
    RngStream rng(5);
    EXPECT_EQ(draw_gaussian(rng, 0.55, 0.0), 0.55);
}

TEST(DrawGaussian, NegativeVarianceThrows) {
    RngStream rng(5);
    EXPECT_THROW(draw_gaussian(rng, 0.0, -1.0), InvalidVariance);
}

TEST(DrawGaussian, LawOfLargeNumbers) {
    RngStream rng(77, 0);
    constexpr int kDraws = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < kDraws; ++i) {
        const double z = draw_gaussian(rng, 0.0, 1.0);
        sum += z;
        sq += z * z;
    }
    const double mean = sum / kDraws;
    const double var = sq / kDraws - mean * mean;
    EXPECT_NEAR(mean, 0.0, 0.02);
    EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(DrawGaussian, ReproducibleFirstDraw) {
    RngStream a(99, 4);
    RngStream b(99, 4);
    EXPECT_EQ(draw_gaussian(a, 1.5, 2.0), draw_gaussian(b, 1.5, 2.0));
}

TEST(DrawIndex, SingletonAndErrors) {
    RngStream rng(1);
    EXPECT_EQ(draw_index(rng, 1), 0);
    EXPECT_THROW(draw_index(rng, 0), InvalidRange);
}

TEST(DrawIndex, ChiSquareUniformity) {
    RngStream rng(11, 0);
    constexpr int kDraws = 100000;
    std::array<int, 4> buckets{};
    for (int i = 0; i < kDraws; ++i) ++buckets[draw_index(rng, 4)];
    double chisq = 0.0;
    const double expected = kDraws / 4.0;
    for (int count : buckets) chisq += (count - expected) * (count - expected) / expected;
    EXPECT_LT(chisq, kChiSq3Dof999);
}

TEST(Shuffle, ConstantsAndSingleton) {
    RngStream rng(3);
    std::vector<int> constant{3, 3, 3};
    shuffle_in_place(rng, constant);
    EXPECT_EQ(constant, (std::vector<int>{3, 3, 3}));

    std::vector<int> single{42};
    shuffle_in_place(rng, single);
    EXPECT_EQ(single, std::vector<int>{42});
}

TEST(Shuffle, PreservesMultiset) {
    RngStream rng(17, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(draw_uniform_int(rng, 1, 30));
        std::vector<std::int64_t> v(n);
        for (auto& x : v) x = draw_uniform_int(rng, 0, 5);
        std::vector<std::int64_t> sorted_before = v;
        std::sort(sorted_before.begin(), sorted_before.end());

        shuffle_in_place(rng, v);

        std::sort(v.begin(), v.end());
        ASSERT_EQ(v, sorted_before);
    }
}

TEST(Shuffle, PermutationIsUniformEnough) {
    // All 6 permutations of 3 distinct items should show up about equally.
    RngStream rng(19, 0);
    std::array<int, 6> counts{};
    constexpr int kTrials = 60000;
    for (int t = 0; t < kTrials; ++t) {
        std::vector<int> v{0, 1, 2};
        shuffle_in_place(rng, v);
        const int code = v[0] * 2 + (v[1] > v[2] ? 1 : 0);
        ++counts[code];
    }
    const double expected = kTrials / 6.0;
    double chisq = 0.0;
    for (int c : counts) chisq += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chisq, 20.515);  // chi-square 5 dof, upper 0.001 tail
}
