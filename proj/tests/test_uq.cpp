#include "yieldopt/uq.hpp"

#include <gtest/gtest.h>

using namespace yieldopt;

namespace {

TruncatedGaussian benchmark() {
    return TruncatedGaussian::symmetric((ParamVec(4) << 10.36, 4.76, 0.58, 0.64).finished(),
                                        (ParamVec(4) << 0.7, 0.7, 0.3, 0.3).finished(),
                                        (ParamVec(4) << 3.0, 3.0, 0.3, 0.3).finished());
}

} // namespace

TEST(TruncatedGaussian, BoundsTravelWithMean) {
    const auto d = benchmark();
    EXPECT_DOUBLE_EQ(d.lower()[0], 7.36);
    EXPECT_DOUBLE_EQ(d.upper()[3], 0.94);
    const auto moved = d.recentered((ParamVec(4) << 9, 5, 1, 1).finished());
    EXPECT_DOUBLE_EQ(moved.lower()[0], 6.0);
    EXPECT_DOUBLE_EQ(moved.upper()[2], 1.3);
    EXPECT_EQ(moved.std_dev(), d.std_dev());
}

TEST(TruncatedGaussian, RejectsBadParameters) {
    const ParamVec one = ParamVec::Ones(2);
    EXPECT_THROW(TruncatedGaussian::symmetric(one, (ParamVec(2) << 1, 0).finished(), one), InvalidInput);
    EXPECT_THROW(TruncatedGaussian::symmetric(one, one, (ParamVec(2) << 1, -1).finished()), InvalidInput);
    EXPECT_THROW(TruncatedGaussian::symmetric(one, ParamVec::Ones(3), one), InvalidInput);
    EXPECT_THROW(benchmark().recentered(one), InvalidInput);
}

TEST(TruncatedGaussian, Pdf) {
    const auto d = TruncatedGaussian::symmetric(ParamVec::Zero(1), ParamVec::Ones(1), ParamVec::Ones(1));
    const ParamVec zero = ParamVec::Zero(1);
    EXPECT_NEAR(d.pdf(zero), 0.3989422804014327, 1e-15);
    // mass of [-1, 1] under N(0, 1)
    EXPECT_NEAR(d.pdf(zero, true), 0.3989422804014327 / 0.6826894921370859, 1e-12);
    EXPECT_EQ(d.pdf(ParamVec::Constant(1, 1.5), true), 0.0);
    EXPECT_GT(d.pdf(ParamVec::Constant(1, 1.5)), 0.0);
}

TEST(Sampling, EveryPointInsideBounds) {
    const auto d = benchmark();
    const auto s = sample(d, 200'000, 9);
    ASSERT_EQ(s.size(), 200'000u);
    for (const auto& p : s.points) ASSERT_TRUE(d.contains(p));
}

TEST(Sampling, SeedReproducesSetAndPrefixProperty) {
    const auto d = benchmark();
    const auto a = sample(d, 500, 77);
    const auto b = sample(d, 500, 77);
    const auto c = sample(d, 1200, 77);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.points[i], b.points[i]);
        EXPECT_EQ(a.points[i], c.points[i]);
    }
    EXPECT_NE(sample(d, 5, 78).points[0], a.points[0]);
}

TEST(Sampling, CommonOffsetsUnderMovedMean) {
    const auto d = benchmark();
    const ParamVec m2 = (ParamVec(4) << 12, 6, 0.7, 0.9).finished();
    const auto a = sample(d, 300, 5);
    const auto b = sample(d.recentered(m2), 300, 5);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_LT(((a.points[i] - d.mean()) - (b.points[i] - m2)).norm(), 1e-12);
}

TEST(Sampling, MomentsOfTruncatedCoordinate) {
    // N(0,1) truncated to [-1, 1]: variance 1 - 2 phi(1) / (2 Phi(1) - 1)
    const auto d = TruncatedGaussian::symmetric(ParamVec::Zero(1), ParamVec::Ones(1), ParamVec::Ones(1));
    const auto s = sample(d, 400'000, 1);
    double m = 0, v = 0;
    for (const auto& p : s.points) m += p[0];
    m /= static_cast<double>(s.size());
    for (const auto& p : s.points) v += (p[0] - m) * (p[0] - m);
    v /= static_cast<double>(s.size() - 1);
    const double exact = 1.0 - 2.0 * 0.24197072451914337 / 0.6826894921370859;
    EXPECT_NEAR(m, 0.0, 0.005);
    EXPECT_NEAR(v, exact, 0.003);
}

TEST(Sampling, RejectsEmptyRequest) { EXPECT_THROW(sample(benchmark(), 0, 1), InvalidInput); }
