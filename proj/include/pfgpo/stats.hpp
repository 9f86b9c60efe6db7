// Small statistical helpers: Gaussian functions, sample moments and the
// Lilliefors normality test used to check the Gaussian error model of the
// log-likelihood estimator.
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pfgpo::stats {

double normal_pdf(double z);
double normal_cdf(double z);
double normal_quantile(double p);

/// log(sum_i exp(v_i)); -inf when every entry is -inf (or the span is empty).
double log_sum_exp(std::span<const double> values);

double mean(std::span<const double> x);
/// Unbiased (n - 1) sample variance.
double variance(std::span<const double> x);
double stddev(std::span<const double> x);

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
    double skewness = 0.0;
    /// Non-excess kurtosis m4 / m2^2 (3 for a Gaussian).
    double kurtosis = 0.0;
};

Moments moments(std::span<const double> x);

/// Kolmogorov-Smirnov distance to N(mean(x), var(x)) with both estimated from x.
double ks_statistic_estimated_normal(std::span<const double> x);

struct NormalityResult {
    double statistic = 0.0;
    double p_value = 0.0;
    int null_replicates = 0;
};

inline constexpr int kDefaultNullReplicates = 10000;
inline constexpr std::uint64_t kDefaultNullSeed = 0x5eed1111;

/**
 * Lilliefors test of normality.
 *
 * The statistic is the KS distance against a Gaussian with estimated mean and
 * variance; its null distribution depends only on the sample size and is
 * simulated with `null_replicates` standard-normal samples. The simulated null
 * is cached per (n, null_replicates, seed), so repeated calls on equally sized
 * samples are cheap.
 *
 * Throws InsufficientDataError for fewer than 20 samples.
 */
NormalityResult lilliefors_test(std::span<const double> samples, int null_replicates = kDefaultNullReplicates,
                                std::uint64_t null_seed = kDefaultNullSeed);

struct QqPoint {
    double theoretical = 0.0;  // standard-normal quantile at (i - 0.5) / n
    double sample = 0.0;       // i-th order statistic
};

std::vector<QqPoint> qq_normal(std::span<const double> samples);

}  // namespace pfgpo::stats
