#include "pfgpo/rng.hpp"
#include "pfgpo/stats.hpp"
#include "pfgpo/core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace pfgpo;

TEST(Stats, NormalFunctions) {
    EXPECT_NEAR(stats::normal_pdf(0.0), 0.3989422804014327, 1e-15);
    EXPECT_NEAR(stats::normal_cdf(0.0), 0.5, 1e-15);
    EXPECT_NEAR(stats::normal_cdf(-1.959963984540054), 0.025, 1e-12);
    EXPECT_NEAR(stats::normal_quantile(0.975), 1.959963984540054, 1e-12);
    EXPECT_GT(stats::normal_cdf(-30.0), 0.0);
}

TEST(Stats, LogSumExpIsStable) {
    const std::vector<double> big{1000.0, 1000.0};
    EXPECT_NEAR(stats::log_sum_exp(big), 1000.0 + std::log(2.0), 1e-12);
    const std::vector<double> small{-1000.0, -1000.0 + std::log(3.0)};
    EXPECT_NEAR(stats::log_sum_exp(small), -1000.0 + std::log(4.0), 1e-12);
    const double ninf = -std::numeric_limits<double>::infinity();
    EXPECT_EQ(stats::log_sum_exp(std::vector<double>{ninf, ninf}), ninf);
    EXPECT_EQ(stats::log_sum_exp(std::vector<double>{}), ninf);
    EXPECT_NEAR(stats::log_sum_exp(std::vector<double>{ninf, 0.5}), 0.5, 0.0);
}

TEST(Stats, Moments) {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 10.0};
    EXPECT_DOUBLE_EQ(stats::mean(x), 4.0);
    EXPECT_DOUBLE_EQ(stats::variance(x), 12.5);
    const auto m = stats::moments(x);
    // population central moments: m2 = 10, m3 = 36, m4 = 278.8
    EXPECT_NEAR(m.skewness, 36.0 / std::pow(10.0, 1.5), 1e-12);
    EXPECT_NEAR(m.kurtosis, 278.8 / 100.0, 1e-12);
}

TEST(Lilliefors, HoldsLevelUnderNull) {
    int accept = 0;
    Rng rng(17);
    std::vector<double> x(10000);
    for (int trial = 0; trial < 100; ++trial) {
        for (auto& v : x) v = rng.normal();
        if (stats::lilliefors_test(x, 2000).p_value > 0.05) ++accept;
    }
    EXPECT_GE(accept, 90);
}

TEST(Lilliefors, RejectsExponentialSamples) {
    int reject = 0;
    std::mt19937_64 gen(23);
    std::exponential_distribution<double> ed(1.0);
    std::vector<double> x(10000);
    for (int trial = 0; trial < 100; ++trial) {
        for (auto& v : x) v = ed(gen);
        if (stats::lilliefors_test(x, 2000).p_value < 0.05) ++reject;
    }
    EXPECT_GE(reject, 99);
}

TEST(Lilliefors, NeedsTwentySamples) {
    std::vector<double> x(19, 1.0);
    EXPECT_THROW(stats::lilliefors_test(x), InsufficientDataError);
}

TEST(Lilliefors, StatisticAgreesWithHandComputation) {
    // n = 20 evenly spread points; the KS distance is attained at a sample point
    std::vector<double> x;
    for (int i = 0; i < 20; ++i) x.push_back(std::pow(static_cast<double>(i), 1.3));
    const double m = stats::mean(x), s = stats::stddev(x);
    double d = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double f = 0.5 * std::erfc(-(x[i] - m) / s / std::sqrt(2.0));
        d = std::max({d, (i + 1) / 20.0 - f, f - i / 20.0});
    }
    EXPECT_NEAR(stats::ks_statistic_estimated_normal(x), d, 1e-12);
}

TEST(QqNormal, SortedAndSymmetric) {
    const std::vector<double> x{3.0, -1.0, 2.0, 0.0};
    const auto qq = stats::qq_normal(x);
    ASSERT_EQ(qq.size(), 4u);
    EXPECT_EQ(qq[0].sample, -1.0);
    EXPECT_EQ(qq[3].sample, 3.0);
    EXPECT_NEAR(qq[0].theoretical, -qq[3].theoretical, 1e-14);
    EXPECT_NEAR(qq[0].theoretical, stats::normal_quantile(0.5 / 4.0), 1e-14);
}
