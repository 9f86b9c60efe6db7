// Gaussian-process surrogate of the log-likelihood surface.
//
// Prior: l(.) ~ GP(c, k) with constant mean c and an anisotropic Matern-3/2
// kernel. Noisy estimates are modelled as lhat_j = l(theta_j) + z_j,
// z_j ~ N(0, noise_var). Hyperparameters are chosen by empirical Bayes.
#pragma once

#include "pfgpo/core.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace pfgpo {

/// The design set D_k = {theta_j, lhat_j}.
struct IterateSet {
    std::vector<ParamVector> thetas;
    std::vector<double> loglik;

    std::size_t k() const { return thetas.size(); }
    bool empty() const { return thetas.empty(); }
    void add(ParamVector theta, double value);
    Eigen::Map<const Eigen::VectorXd> values() const;
};

struct GpHyperparams {
    double mean_const = 0.0;
    double signal_var = 1.0;
    Eigen::VectorXd length_scales;  // per dimension, in parameter units
    double noise_var = 1e-2;
};

inline constexpr double kNoiseFloor = 1e-6;

/// sigma_f^2 (1 + sqrt(3) r) exp(-sqrt(3) r), r the length-scaled Euclidean distance.
double matern32(const ParamVector& a, const ParamVector& b, const GpHyperparams& hyper);

/// K(thetas, thetas) + noise_var I.
Eigen::MatrixXd gram_matrix(const IterateSet& data, const GpHyperparams& hyper);

/**
 * Cholesky factor of a symmetric matrix, retrying with diagonal jitter
 * 1e-10, 1e-9, ..., 1e-4 (relative to the mean diagonal) until it succeeds.
 * Throws ConditioningError when every attempt fails.
 */
struct JitteredCholesky {
    Eigen::MatrixXd lower;
    double jitter = 0.0;  // absolute amount added to the diagonal
};
JitteredCholesky jittered_cholesky(const Eigen::MatrixXd& gram);

/// log N(lhat; c 1, K + noise_var I).
double log_marginal_likelihood(const IterateSet& data, const GpHyperparams& hyper);

/// Prior settings used before enough data exists for empirical Bayes.
GpHyperparams default_hyperparams(const IterateSet& data, const BoxDomain& domain, double noise_floor = kNoiseFloor);

struct GpPrediction {
    double mu = 0.0;
    double var_latent = 0.0;
    double var_observed = 0.0;  // var_latent + noise_var
};

/// A GP conditioned on an iterate set. Immutable; predict() is thread safe.
class GpPosterior {
public:
    GpPosterior(IterateSet train, GpHyperparams hyper);

    GpPrediction predict(const ParamVector& theta) const;

    const GpHyperparams& hyper() const { return hyper_; }
    const IterateSet& train() const { return train_; }
    const Eigen::MatrixXd& chol_factor() const { return chol_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    double jitter() const { return jitter_; }
    double log_marginal_likelihood() const { return lml_; }

private:
    IterateSet train_;
    GpHyperparams hyper_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
    double lml_ = 0.0;
};

struct GpFitConfig {
    std::size_t k_min = 5;
    int n_starts = 5;
    double noise_floor = kNoiseFloor;
    int max_local_iterations = 200;
    double simplex_tolerance = 1e-3;
    // search box for length-scales relative to the domain width, and for noise_var / signal_var
    double min_rel_length = 1e-2;
    double max_rel_length = 1e1;
    double min_noise_ratio = 1e-10;
    double max_noise_ratio = 1e1;
};

/**
 * Empirical-Bayes fit. With fewer than config.k_min points the hyperparameters
 * are held at `init` and only the factorization is computed. Otherwise the
 * log marginal likelihood is maximized by multi-start Nelder-Mead over
 * log length-scales and the log noise-to-signal ratio, with the constant mean
 * and signal variance profiled out in closed form. The result never has a lower
 * marginal likelihood than `init`.
 */
GpPosterior fit(const IterateSet& data, const BoxDomain& domain, const GpHyperparams& init,
                const GpFitConfig& config = {});

}  // namespace pfgpo
