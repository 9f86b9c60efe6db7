// Expected-improvement acquisition over a GP surrogate.
#pragma once

#include "pfgpo/direct_optimizer.hpp"
#include "pfgpo/gp_surrogate.hpp"

namespace pfgpo {

struct AcquisitionConfig {
    double zeta = 0.01;
    int inner_max_evals = 500;
};

/// Below this posterior standard deviation EI falls back to the deterministic improvement.
inline constexpr double kSigmaEps = 1e-9;

/// Largest posterior mean over the training inputs (not the raw estimates).
double mu_max(const GpPosterior& post);

/// sigma [Z Phi(Z) + phi(Z)], Z = (mu - mu_max - zeta) / sigma.
double expected_improvement(double mu, double sigma, double mu_max, double zeta);

/// EI at theta using the latent posterior standard deviation.
double expected_improvement(const GpPosterior& post, const ParamVector& theta, double mu_max, double zeta);

struct Proposal {
    ParamVector theta;
    double ei = 0.0;
    int n_evals = 0;
};

/// DIRECT maximizer of EI over the domain. `direct.max_evals` is overridden by config.inner_max_evals.
Proposal next_iterate(const GpPosterior& post, const BoxDomain& domain, const AcquisitionConfig& config,
                      DirectConfig direct = {});

}  // namespace pfgpo
