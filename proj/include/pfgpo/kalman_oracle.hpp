// Exact log-likelihood of the scalar LGSS model via the Kalman filter.
#pragma once

#include "pfgpo/ssm_models.hpp"

#include <functional>
#include <span>

namespace pfgpo {

struct KalmanState {
    double mean = 0.0;
    double variance = 0.0;
};

/// l(theta) = sum_t log N(y_t; yhat_{t|t-1}, S_t) for x_0 = 0 known.
double kalman_loglik(double theta, std::span<const double> y);
double kalman_loglik(const ParamVector& theta, const ObservationSeries& y);

struct GridMaximum {
    double theta = 0.0;
    double value = 0.0;
};

/// Maximizes `objective` over `points` equispaced values in [lo, hi]; ties go to the smaller value.
GridMaximum grid_argmax(const std::function<double(double)>& objective, double lo, double hi, int points);

/// Kalman grid-search MLE of the LGSS parameter over [-1, 1].
GridMaximum grid_mle(const ObservationSeries& y, int grid_points = 201);

}  // namespace pfgpo
