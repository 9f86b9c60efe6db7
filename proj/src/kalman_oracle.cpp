#include "pfgpo/kalman_oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pfgpo {

double kalman_loglik(double theta, std::span<const double> y) {
    if (y.empty()) throw std::invalid_argument("kalman_loglik: empty observation series");
    if (!(std::abs(theta) <= 1.0)) throw DomainError("kalman_loglik: |theta| must be at most 1");

    constexpr double obs_var = kLgssObsStd * kLgssObsStd;
    const double log2pi = std::log(2.0 * std::numbers::pi);

    KalmanState filt{0.0, 0.0};  // x_0 known exactly
    double loglik = 0.0;
    for (double yt : y) {
        const KalmanState pred{theta * filt.mean, theta * theta * filt.variance + 1.0};
        const double innov = yt - pred.mean;
        const double s = pred.variance + obs_var;
        loglik += -0.5 * (log2pi + std::log(s) + innov * innov / s);
        const double gain = pred.variance / s;
        filt.mean = pred.mean + gain * innov;
        filt.variance = (1.0 - gain) * pred.variance;
    }
    return loglik;
}

double kalman_loglik(const ParamVector& theta, const ObservationSeries& y) {
    if (theta.size() != 1) throw DomainError("kalman_loglik: LGSS has a single parameter");
    return kalman_loglik(theta[0], y.values());
}

GridMaximum grid_argmax(const std::function<double(double)>& objective, double lo, double hi, int points) {
    if (points < 3) throw std::invalid_argument("grid search needs at least 3 points");
    GridMaximum best{lo, -std::numeric_limits<double>::infinity()};
    bool first = true;
    for (int i = 0; i < points; ++i) {
        // endpoints hit exactly
        const double theta = i == points - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        const double value = objective(theta);
        if (first || value > best.value) {
            best = {theta, value};
            first = false;
        }
    }
    return best;
}

GridMaximum grid_mle(const ObservationSeries& y, int grid_points) {
    return grid_argmax([&](double theta) { return kalman_loglik(theta, y.values()); }, -1.0, 1.0, grid_points);
}

}  // namespace pfgpo
