#include <gtest/gtest.h>

#include <mbvp/divergence.hpp>

using namespace mbvp;

namespace {

template <class F>
std::vector<double> sampled(const std::vector<double>& eps, F f) {
    std::vector<double> I;
    for (double e : eps) I.push_back(f(e));
    return I;
}

}  // namespace

TEST(Divergence, FiniteLimitWithPowerApproach) {
    auto eps = dyadic(0.25, 11);
    auto v = classify(eps, sampled(eps, [](double e) { return 3.0 - 2.0 * std::sqrt(e); }));
    EXPECT_EQ(v.classification, Classification::convergent);
    EXPECT_NEAR(v.value, 3.0, 1e-6);
    EXPECT_NEAR(v.q, 0.5, 1e-3);
}

TEST(Divergence, LogarithmicGrowth) {
    auto eps = dyadic(0.25, 11);
    auto v = classify(eps, sampled(eps, [](double e) { return 1.0 + std::log(1.0 / e); }));
    EXPECT_EQ(v.classification, Classification::divergent_log);
    EXPECT_TRUE(v.divergent());
}

TEST(Divergence, PowerGrowthReportsExponent) {
    auto eps = dyadic(0.25, 11);
    auto v = classify(eps, sampled(eps, [](double e) { return std::pow(e, -0.5) - 2.0; }));
    EXPECT_EQ(v.classification, Classification::divergent_power);
    EXPECT_NEAR(v.p, 0.5, 1e-3);
}

TEST(Divergence, ZeroAndSaturatedSequences) {
    auto eps = dyadic(0.25, 8);
    EXPECT_EQ(classify(eps, std::vector<double>(8, 0.0)).classification, Classification::convergent);
    auto v = classify(eps, std::vector<double>(8, 2.5));
    EXPECT_EQ(v.classification, Classification::convergent);
    EXPECT_DOUBLE_EQ(v.value, 2.5);
}

TEST(Divergence, NonFiniteSampleIsDivergent) {
    auto eps = dyadic(0.25, 8);
    std::vector<double> I(8, 1.0);
    I.back() = std::numeric_limits<double>::infinity();
    EXPECT_TRUE(classify(eps, I).divergent());
}

TEST(Divergence, TooFewSamplesRejected) {
    auto eps = dyadic(0.25, 4);
    EXPECT_THROW(classify(eps, std::vector<double>(4, 1.0)), NumericalError);
    EXPECT_THROW(classify(dyadic(0.25, 8), std::vector<double>(7, 1.0)), NumericalError);
}

TEST(Divergence, OscillatingSequenceIsNotConvergent) {
    auto eps = dyadic(0.25, 11);
    std::vector<double> I;
    for (std::size_t j = 0; j < eps.size(); ++j) I.push_back(1.0 + (j % 2 ? 0.3 : -0.3));
    EXPECT_NE(classify(eps, I).classification, Classification::convergent);
}

TEST(Divergence, VerdictKeepsSamples) {
    auto eps = dyadic(0.5, 6);
    auto v = classify(eps, sampled(eps, [](double e) { return 1.0 - e; }));
    ASSERT_EQ(v.samples.size(), 6u);
    EXPECT_DOUBLE_EQ(v.samples[2].first, 0.125);
    EXPECT_DOUBLE_EQ(v.samples[2].second, 0.875);
}
