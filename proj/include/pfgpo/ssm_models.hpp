// Scalar-state state-space models
//
//   x_t | x_{t-1} ~ f_theta(x_t | x_{t-1})
//   y_t | x_t     ~ g_theta(y_t | x_t)
//
// with a known initial state x_0. Models are plain values holding callables
// and are immutable once built, so a single instance may be shared between
// threads as long as each caller supplies its own Rng.
#pragma once

#include "pfgpo/core.hpp"
#include "pfgpo/rng.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pfgpo {

struct SsmSpec {
    using TransitionSampler = std::function<double(const ParamVector& theta, double x_prev, Rng& rng)>;
    using ObservationSampler = std::function<double(const ParamVector& theta, double x, Rng& rng)>;
    using ObservationLogDensity = std::function<double(const ParamVector& theta, double x, double y)>;
    using TransitionLogDensity = std::function<double(const ParamVector& theta, double x, double x_prev)>;

    std::string name;
    int param_dim = 0;
    BoxDomain domain;
    double initial_state = 0.0;
    TransitionSampler transition_sample;
    ObservationSampler observation_sample;
    /// log g_theta(y | x); finite or -inf, never NaN.
    ObservationLogDensity observation_logdensity;
    /// log f_theta(x | x_prev); optional, used only by oracles.
    TransitionLogDensity transition_logdensity;
};

struct ObservationSeries {
    std::vector<double> y;

    ObservationSeries() = default;
    explicit ObservationSeries(std::vector<double> values);

    std::size_t T() const { return y.size(); }
    std::span<const double> values() const { return y; }
};

struct SimulatedData {
    std::vector<double> states;
    ObservationSeries observations;
};

/// Draws x_{1:T} and y_{1:T} from the generative model. Reproducible from seed.
SimulatedData simulate(const SsmSpec& model, const ParamVector& theta, std::size_t T, std::uint64_t seed);

/// x_{t+1} ~ N(theta x_t, 1), y_t ~ N(x_t, 0.1^2), theta in [-1, 1].
SsmSpec lgss_model();

/// Hull-White stochastic volatility:
/// x_{t+1} ~ N(theta_1 x_t, theta_2^2), y_t ~ N(0, 0.7^2 exp(x_t)),
/// theta in [-1, 1] x [0, 2]. At theta_2 = 0 the transition is deterministic.
SsmSpec hullwhite_model();

/// Registry lookup: "lgss" or "hullwhite". Throws std::invalid_argument otherwise.
SsmSpec make_model(std::string_view name);
std::vector<std::string> model_names();

inline constexpr double kLgssObsStd = 0.1;
inline constexpr double kHullWhiteObsScale = 0.7;

}  // namespace pfgpo
