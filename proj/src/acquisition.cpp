#include "pfgpo/acquisition.hpp"

#include "pfgpo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pfgpo {

namespace {

// Z Phi(Z) + phi(Z) for Z < -8, without cancellation. With x = -Z the Mills
// ratio is 1 / (x + b), b = 1 / (x + 2 / (x + 3 / (x + ...))), and
// Z Phi(Z) + phi(Z) = phi(Z) b / (x + b).
double ei_lower_tail(double z) {
    const double x = -z;
    double b = 0.0;
    for (int n = 60; n >= 2; --n) b = static_cast<double>(n) / (x + b);
    b = 1.0 / (x + b);
    return std::exp(std::log(stats::normal_pdf(0.0)) - 0.5 * z * z + std::log(b / (x + b)));
}

}  // namespace

double mu_max(const GpPosterior& post) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& theta : post.train().thetas) best = std::max(best, post.predict(theta).mu);
    return best;
}

double expected_improvement(double mu, double sigma, double mu_max, double zeta) {
    const double gain = mu - mu_max - zeta;
    if (sigma < kSigmaEps) return std::max(gain, 0.0);
    const double z = gain / sigma;
    const double unit = z < -8.0 ? ei_lower_tail(z) : z * stats::normal_cdf(z) + stats::normal_pdf(z);
    return std::max(sigma * unit, 0.0);
}

double expected_improvement(const GpPosterior& post, const ParamVector& theta, double mu_max, double zeta) {
    const auto pred = post.predict(theta);
    return expected_improvement(pred.mu, std::sqrt(pred.var_latent), mu_max, zeta);
}

Proposal next_iterate(const GpPosterior& post, const BoxDomain& domain, const AcquisitionConfig& config,
                      DirectConfig direct) {
    const double peak = mu_max(post);
    direct.max_evals = config.inner_max_evals;
    const auto res = direct_maximize(
        [&](const ParamVector& theta) { return expected_improvement(post, theta, peak, config.zeta); }, domain, direct);
    return {res.theta_best, res.value_best, res.n_evals};
}

}  // namespace pfgpo
