#include "pfgpo/spsa.hpp"

#include "pfgpo/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace pfgpo {

void SpsaConfig::validate() const {
    if (!(a >= 0.0) || !(c > 0.0)) throw std::invalid_argument("SPSA: need a >= 0 and c > 0");
    if (!(gamma > 0.0 && gamma < alpha && alpha <= 1.0)) {
        throw std::invalid_argument("SPSA: exponents must satisfy 0 < gamma < alpha <= 1");
    }
    if (K < 0) throw std::invalid_argument("SPSA: iteration budget must be non-negative");
    if (!(stability() >= 0.0)) throw std::invalid_argument("SPSA: stability constant must be non-negative");
}

SpsaTrace run_spsa(const NoisyObjective& objective, const ParamVector& theta0, const BoxDomain& domain,
                   const SpsaConfig& config, std::uint64_t seed) {
    config.validate();
    domain.require_contains(theta0);

    Rng perturb(derive_seed(seed, 0));
    const auto d = theta0.size();
    const double big_a = config.stability();

    SpsaTrace trace;
    ParamVector theta = theta0;
    trace.iterates.push_back(theta);
    trace.evals.push_back(0);

    for (int k = 0; k < config.K; ++k) {
        const double ak = config.a / std::pow(big_a + k + 1.0, config.alpha);
        const double ck = config.c / std::pow(k + 1.0, config.gamma);

        Eigen::VectorXd delta(d);
        for (Eigen::Index i = 0; i < d; ++i) delta[i] = perturb.rademacher();

        const std::uint64_t eval_seed = derive_seed(seed, static_cast<std::uint64_t>(k) + 1);
        trace.seeds.push_back(eval_seed);
        const double f_plus = objective(domain.clamp(theta + ck * delta), eval_seed);
        const double f_minus = objective(domain.clamp(theta - ck * delta), eval_seed);
        trace.loglik_evals += 2;

        if (std::isfinite(f_plus) && std::isfinite(f_minus)) {
            const Eigen::VectorXd grad = ((f_plus - f_minus) / (2.0 * ck)) * delta.cwiseInverse();
            theta = domain.clamp(theta + ak * grad);
        } else {
            ++trace.skipped;
        }
        trace.iterates.push_back(theta);
        trace.evals.push_back(trace.loglik_evals);
    }
    return trace;
}

}  // namespace pfgpo
