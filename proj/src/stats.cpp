#include "pfgpo/stats.hpp"

#include "pfgpo/core.hpp"
#include "pfgpo/rng.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

namespace pfgpo::stats {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

double log_sum_exp(std::span<const double> values) {
    double vmax = -std::numeric_limits<double>::infinity();
    for (double v : values) vmax = std::max(vmax, v);
    if (!std::isfinite(vmax)) return vmax;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - vmax);
    return vmax + std::log(acc);
}

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

Moments moments(std::span<const double> x) {
    Moments out;
    const auto n = static_cast<double>(x.size());
    out.mean = mean(x);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - out.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    out.stddev = std::sqrt(m2 / (n - 1.0));
    m2 /= n;
    m3 /= n;
    m4 /= n;
    out.skewness = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2);
    return out;
}

namespace {

// KS distance of an already sorted sample against N(m, s^2).
double ks_sorted(std::span<const double> sorted, double m, double s) {
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf((sorted[i] - m) / s);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, hi - f, f - lo});
    }
    return d;
}

double ks_in_place(std::vector<double>& x) {
    std::sort(x.begin(), x.end());
    return ks_sorted(x, mean(x), stddev(x));
}

using NullKey = std::tuple<std::size_t, int, std::uint64_t>;

std::shared_ptr<const std::vector<double>> null_distribution(std::size_t n, int reps, std::uint64_t seed) {
    static std::mutex mutex;
    static std::map<NullKey, std::shared_ptr<const std::vector<double>>> cache;

    const NullKey key{n, reps, seed};
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }

    auto dist = std::make_shared<std::vector<double>>(static_cast<std::size_t>(reps));
    Rng rng(seed);
    std::vector<double> sample(n);
    for (auto& stat : *dist) {
        for (auto& v : sample) v = rng.normal();
        stat = ks_in_place(sample);
    }
    std::sort(dist->begin(), dist->end());

    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(dist)).first->second;
}

}  // namespace

double ks_statistic_estimated_normal(std::span<const double> x) {
    std::vector<double> copy(x.begin(), x.end());
    return ks_in_place(copy);
}

NormalityResult lilliefors_test(std::span<const double> samples, int null_replicates, std::uint64_t null_seed) {
    if (samples.size() < 20) throw InsufficientDataError("normality test needs at least 20 samples");
    if (null_replicates < 1) throw std::invalid_argument("normality test needs at least one null replicate");

    NormalityResult out;
    out.statistic = ks_statistic_estimated_normal(samples);
    out.null_replicates = null_replicates;

    const auto null = null_distribution(samples.size(), null_replicates, null_seed);
    const auto n_at_least = static_cast<double>(null->end() - std::lower_bound(null->begin(), null->end(), out.statistic));
    out.p_value = (1.0 + n_at_least) / (1.0 + null_replicates);
    return out;
}

std::vector<QqPoint> qq_normal(std::span<const double> samples) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    std::vector<QqPoint> out(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        out[i] = {normal_quantile((static_cast<double>(i) + 0.5) / n), sorted[i]};
    }
    return out;
}

}  // namespace pfgpo::stats
