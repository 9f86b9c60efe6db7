// Gaussian-process optimisation of a particle-filter log-likelihood.
//
// For k = 1..K: estimate lhat(theta_k) with one particle-filter run (seed
// seed + k), refit the GP surrogate on D_k, and propose theta_{k+1} as the
// expected-improvement maximizer. The estimate is the DIRECT maximizer of
// the final posterior mean over the whole domain.
#pragma once

#include "pfgpo/acquisition.hpp"
#include "pfgpo/gp_surrogate.hpp"
#include "pfgpo/particle_filter.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace pfgpo {

struct GpoConfig {
    int K = 50;
    int N = 1000;
    ParamVector theta1;
    double zeta = 0.01;
    std::uint64_t seed = 1;
    /// Replacement for degenerate (-inf) estimates. Unset: lowest finite estimate so far minus 100, or -1e10.
    std::optional<double> loglik_floor;
    Resampling resampling = Resampling::systematic;
    GpFitConfig gp;
    int inner_max_evals = 500;
    DirectConfig final_direct;
    /// Iterations at which a copy of the posterior is kept for plotting.
    std::vector<int> snapshot_iterations;

    void validate(const BoxDomain& domain) const;
};

struct IterationRecord {
    int k = 0;
    ParamVector theta;
    double loglik_hat = 0.0;  // value fed to the surrogate (after flooring)
    bool degenerate = false;
    double mu_max = 0.0;
    double ei_max = 0.0;
    GpHyperparams hyper;
};

struct PosteriorSnapshot {
    int k = 0;
    GpPosterior posterior;
};

struct GpoResult {
    ParamVector theta_hat;
    double mu_hat = 0.0;  // posterior mean at theta_hat
    IterateSet history;
    std::vector<IterationRecord> per_iteration;
    std::optional<GpPosterior> final_posterior;
    std::vector<PosteriorSnapshot> snapshots;
    BoxDomain domain;
    double zeta = 0.01;
    int pf_evaluations = 0;
    int n_degenerate = 0;
};

using LogLikOracle = std::function<LogLikEstimate(const ParamVector& theta, std::uint64_t seed)>;

GpoResult run_gpo(const LogLikOracle& oracle, const BoxDomain& domain, const GpoConfig& config);
GpoResult run_gpo(const SsmSpec& model, const ObservationSeries& y, const GpoConfig& config);

struct SurfaceRow {
    ParamVector theta;
    double mu = 0.0;
    double sigma = 0.0;  // latent posterior standard deviation
    double ei = 0.0;
};

/// Regular grid (grid_points per axis) of posterior mean, sd and EI. Only for d <= 2.
std::vector<SurfaceRow> surface_grid(const GpPosterior& post, const BoxDomain& domain, int grid_points, double zeta);

/// Surface of the final posterior of a run.
std::vector<SurfaceRow> emit_diagnostics(const GpoResult& result, int grid_points);

}  // namespace pfgpo
