#include "pfgpo/gpo_driver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pfgpo {

void GpoConfig::validate(const BoxDomain& domain) const {
    if (K < 1) throw std::invalid_argument("GPO: need at least one iteration");
    if (N < 1) throw std::invalid_argument("GPO: need at least one particle");
    if (!(zeta >= 0.0) || !std::isfinite(zeta)) throw std::invalid_argument("GPO: zeta must be finite and >= 0");
    if (inner_max_evals < 1) throw std::invalid_argument("GPO: inner DIRECT budget must be positive");
    domain.require_contains(theta1);
}

GpoResult run_gpo(const LogLikOracle& oracle, const BoxDomain& domain, const GpoConfig& config) {
    config.validate(domain);

    GpoResult result;
    result.domain = domain;
    result.zeta = config.zeta;
    const AcquisitionConfig acq{config.zeta, config.inner_max_evals};

    double lowest_finite = std::numeric_limits<double>::infinity();
    std::optional<GpHyperparams> previous;
    ParamVector theta = config.theta1;

    for (int k = 1; k <= config.K; ++k) {
        const auto est = oracle(theta, config.seed + static_cast<std::uint64_t>(k));
        ++result.pf_evaluations;

        IterationRecord rec;
        rec.k = k;
        rec.theta = theta;
        rec.degenerate = est.degenerate || !std::isfinite(est.value);
        if (rec.degenerate) {
            ++result.n_degenerate;
            rec.loglik_hat = config.loglik_floor.value_or(std::isfinite(lowest_finite) ? lowest_finite - 100.0 : -1e10);
        } else {
            rec.loglik_hat = est.value;
            lowest_finite = std::min(lowest_finite, est.value);
        }
        result.history.add(theta, rec.loglik_hat);

        const GpHyperparams init = result.history.k() < config.gp.k_min || !previous
                                       ? default_hyperparams(result.history, domain, config.gp.noise_floor)
                                       : *previous;
        GpPosterior post = fit(result.history, domain, init, config.gp);
        previous = post.hyper();

        const auto proposal = next_iterate(post, domain, acq);
        rec.mu_max = mu_max(post);
        rec.ei_max = proposal.ei;
        rec.hyper = post.hyper();
        result.per_iteration.push_back(rec);

        if (std::find(config.snapshot_iterations.begin(), config.snapshot_iterations.end(), k) !=
            config.snapshot_iterations.end()) {
            result.snapshots.push_back({k, post});
        }
        theta = proposal.theta;
        result.final_posterior.emplace(std::move(post));
    }

    const auto& post = *result.final_posterior;
    const auto best = direct_maximize([&](const ParamVector& t) { return post.predict(t).mu; }, domain,
                                      config.final_direct);
    result.theta_hat = best.theta_best;
    result.mu_hat = best.value_best;
    return result;
}

GpoResult run_gpo(const SsmSpec& model, const ObservationSeries& y, const GpoConfig& config) {
    return run_gpo(
        [&](const ParamVector& theta, std::uint64_t seed) {
            return estimate_loglik(model, theta, y, config.N, seed, config.resampling);
        },
        model.domain, config);
}

std::vector<SurfaceRow> surface_grid(const GpPosterior& post, const BoxDomain& domain, int grid_points, double zeta) {
    const auto d = domain.dim();
    if (d > 2) throw std::invalid_argument(fmt::format("surface grid supports d <= 2, got d = {}", d));
    if (grid_points < 2) throw std::invalid_argument("surface grid needs at least 2 points per axis");

    const double peak = mu_max(post);
    auto axis = [&](std::size_t dim, int i) {
        const double lo = domain.lower()[static_cast<Eigen::Index>(dim)];
        const double hi = domain.upper()[static_cast<Eigen::Index>(dim)];
        return i == grid_points - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / (grid_points - 1);
    };

    std::vector<SurfaceRow> rows;
    const int outer = d == 2 ? grid_points : 1;
    for (int i = 0; i < grid_points; ++i) {
        for (int j = 0; j < outer; ++j) {
            ParamVector theta(static_cast<Eigen::Index>(d));
            theta[0] = axis(0, i);
            if (d == 2) theta[1] = axis(1, j);
            const auto pred = post.predict(theta);
            const double sigma = std::sqrt(pred.var_latent);
            rows.push_back({theta, pred.mu, sigma, expected_improvement(pred.mu, sigma, peak, zeta)});
        }
    }
    return rows;
}

std::vector<SurfaceRow> emit_diagnostics(const GpoResult& result, int grid_points) {
    if (!result.final_posterior) throw std::logic_error("emit_diagnostics: run has no posterior");
    return surface_grid(*result.final_posterior, result.domain, grid_points, result.zeta);
}

}  // namespace pfgpo
