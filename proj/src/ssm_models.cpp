#include "pfgpo/ssm_models.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pfgpo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double normal_logpdf(double x, double mean, double stddev) {
    const double z = (x - mean) / stddev;
    return -kHalfLog2Pi - std::log(stddev) - 0.5 * z * z;
}

// Gaussian transition density, with the zero-variance boundary treated as a point mass.
double gaussian_transition_logpdf(double x, double mean, double stddev) {
    if (stddev == 0.0) {
        return x == mean ? std::numeric_limits<double>::infinity() : kNegInf;
    }
    return normal_logpdf(x, mean, stddev);
}

}  // namespace

ObservationSeries::ObservationSeries(std::vector<double> values) : y(std::move(values)) {
    if (y.empty()) throw std::invalid_argument("observation series must contain at least one value");
    for (double v : y) {
        if (!std::isfinite(v)) throw std::invalid_argument("observation series contains a non-finite value");
    }
}

SimulatedData simulate(const SsmSpec& model, const ParamVector& theta, std::size_t T, std::uint64_t seed) {
    model.domain.require_contains(theta);
    if (T == 0) throw std::invalid_argument("simulate: T must be at least 1");

    Rng rng(seed);
    SimulatedData out;
    out.states.resize(T);
    std::vector<double> y(T);
    double x = model.initial_state;
    for (std::size_t t = 0; t < T; ++t) {
        x = model.transition_sample(theta, x, rng);
        out.states[t] = x;
        y[t] = model.observation_sample(theta, x, rng);
    }
    out.observations = ObservationSeries(std::move(y));
    return out;
}

SsmSpec lgss_model() {
    SsmSpec m;
    m.name = "lgss";
    m.param_dim = 1;
    m.domain = BoxDomain(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0));
    m.initial_state = 0.0;
    m.transition_sample = [](const ParamVector& theta, double x_prev, Rng& rng) {
        return theta[0] * x_prev + rng.normal();
    };
    m.observation_sample = [](const ParamVector&, double x, Rng& rng) { return x + kLgssObsStd * rng.normal(); };
    m.observation_logdensity = [](const ParamVector&, double x, double y) {
        return normal_logpdf(y, x, kLgssObsStd);
    };
    m.transition_logdensity = [](const ParamVector& theta, double x, double x_prev) {
        return normal_logpdf(x, theta[0] * x_prev, 1.0);
    };
    return m;
}

SsmSpec hullwhite_model() {
    SsmSpec m;
    m.name = "hullwhite";
    m.param_dim = 2;
    Eigen::VectorXd lo(2), hi(2);
    lo << -1.0, 0.0;
    hi << 1.0, 2.0;
    m.domain = BoxDomain(lo, hi);
    m.initial_state = 0.0;
    m.transition_sample = [](const ParamVector& theta, double x_prev, Rng& rng) {
        return theta[0] * x_prev + theta[1] * rng.normal();
    };
    m.observation_sample = [](const ParamVector&, double x, Rng& rng) {
        return kHullWhiteObsScale * std::exp(0.5 * x) * rng.normal();
    };
    m.observation_logdensity = [](const ParamVector&, double x, double y) {
        // log N(y; 0, 0.7^2 e^x), written so that extreme x gives -inf rather than NaN
        const double quad = y == 0.0 ? 0.0 : 0.5 * y * y * std::exp(-x) / (kHullWhiteObsScale * kHullWhiteObsScale);
        const double value = -kHalfLog2Pi - std::log(kHullWhiteObsScale) - 0.5 * x - quad;
        return std::isnan(value) ? kNegInf : value;
    };
    m.transition_logdensity = [](const ParamVector& theta, double x, double x_prev) {
        return gaussian_transition_logpdf(x, theta[0] * x_prev, theta[1]);
    };
    return m;
}

SsmSpec make_model(std::string_view name) {
    if (name == "lgss") return lgss_model();
    if (name == "hullwhite") return hullwhite_model();
    throw std::invalid_argument(fmt::format("unknown model '{}' (expected one of: lgss, hullwhite)", name));
}

std::vector<std::string> model_names() { return {"lgss", "hullwhite"}; }

}  // namespace pfgpo
