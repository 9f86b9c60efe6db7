#include "pfgpo/particle_filter.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace pfgpo {

Resampling parse_resampling(std::string_view name) {
    if (name == "systematic") return Resampling::systematic;
    if (name == "multinomial") return Resampling::multinomial;
    throw std::invalid_argument(fmt::format("unknown resampling scheme '{}'", name));
}

std::string_view to_string(Resampling scheme) {
    return scheme == Resampling::systematic ? "systematic" : "multinomial";
}

bool ParticleSystem::degenerate() const {
    return std::none_of(log_weights.begin(), log_weights.end(),
                        [](double lw) { return lw > -std::numeric_limits<double>::infinity(); });
}

namespace {

// Normalized linear weights into `weights`; returns log sum_i exp(log_weights[i]).
double normalize_weights(std::span<const double> log_weights, std::vector<double>& weights) {
    const std::size_t n = log_weights.size();
    weights.resize(n);
    const double lmax = n == 0 ? -std::numeric_limits<double>::infinity()
                               : *std::max_element(log_weights.begin(), log_weights.end());
    if (!(lmax > -std::numeric_limits<double>::infinity())) return lmax;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        weights[i] = std::exp(log_weights[i] - lmax);
        acc += weights[i];
    }
    for (auto& w : weights) w /= acc;
    return lmax + std::log(acc);
}

void resample_normalized(std::span<const double> weights, Rng& rng, Resampling scheme,
                         std::vector<std::size_t>& ancestors, std::vector<double>& scratch) {
    const std::size_t n = weights.size();
    ancestors.resize(n);
    const auto inv_n = 1.0 / static_cast<double>(n);
    std::size_t j = 0;
    double cdf = weights[0];
    auto place = [&](std::size_t k, double u) {
        while (j + 1 < n && cdf <= u) cdf += weights[++j];
        ancestors[k] = j;
    };

    if (scheme == Resampling::systematic) {
        const double u0 = rng.uniform() * inv_n;
        for (std::size_t k = 0; k < n; ++k) place(k, u0 + static_cast<double>(k) * inv_n);
    } else {
        scratch.resize(n);
        for (auto& v : scratch) v = rng.uniform();
        std::sort(scratch.begin(), scratch.end());
        for (std::size_t k = 0; k < n; ++k) place(k, scratch[k]);
    }
}

}  // namespace

void resample_into(std::span<const double> log_weights, Rng& rng, Resampling scheme,
                   std::vector<std::size_t>& ancestors) {
    std::vector<double> weights, scratch;
    if (!(normalize_weights(log_weights, weights) > -std::numeric_limits<double>::infinity())) {
        throw DegeneracyError("resample: all particle weights are zero");
    }
    resample_normalized(weights, rng, scheme, ancestors, scratch);
}

std::vector<std::size_t> resample(std::span<const double> log_weights, Rng& rng, Resampling scheme) {
    std::vector<std::size_t> ancestors;
    resample_into(log_weights, rng, scheme, ancestors);
    return ancestors;
}

LogLikEstimate estimate_loglik(const SsmSpec& model, const ParamVector& theta, const ObservationSeries& y,
                               int n_particles, std::uint64_t seed, Resampling scheme) {
    if (n_particles < 1) throw std::invalid_argument("estimate_loglik: need at least one particle");
    model.domain.require_contains(theta);

    const auto n = static_cast<std::size_t>(n_particles);
    Rng rng(seed);
    ParticleSystem system{std::vector<double>(n, model.initial_state), std::vector<double>(n, 0.0)};
    std::vector<double> scratch(n);
    std::vector<double> weights;
    std::vector<double> uniforms;
    std::vector<std::size_t> ancestors;

    LogLikEstimate est;
    est.n_particles = n_particles;
    est.seed = seed;
    est.per_step_logsum.reserve(y.T());

    for (std::size_t t = 0; t < y.T(); ++t) {
        if (t > 0) {
            resample_normalized(weights, rng, scheme, ancestors, uniforms);
            for (std::size_t i = 0; i < n; ++i) scratch[i] = system.states[ancestors[i]];
            system.states.swap(scratch);
        }
        for (std::size_t i = 0; i < n; ++i) {
            system.states[i] = model.transition_sample(theta, system.states[i], rng);
            system.log_weights[i] = model.observation_logdensity(theta, system.states[i], y.y[t]);
        }
        const double logsum = normalize_weights(system.log_weights, weights);
        est.per_step_logsum.push_back(logsum);
        if (!(logsum > -std::numeric_limits<double>::infinity())) {
            est.degenerate = true;
            est.value = -std::numeric_limits<double>::infinity();
            return est;
        }
    }

    double total = 0.0;
    for (double v : est.per_step_logsum) total += v;
    est.value = total - static_cast<double>(y.T()) * std::log(static_cast<double>(n));
    return est;
}

std::vector<double> Replicates::finite_values() const {
    std::vector<double> out;
    out.reserve(loglik.size() - n_degenerate);
    for (std::size_t i = 0; i < loglik.size(); ++i) {
        if (!degenerate[i]) out.push_back(loglik[i]);
    }
    return out;
}

Replicates replicate_loglik(const SsmSpec& model, const ParamVector& theta, const ObservationSeries& y,
                            int n_particles, int n_reps, std::uint64_t base_seed, Resampling scheme,
                            unsigned threads) {
    if (n_reps < 2) throw std::invalid_argument("replicate_loglik: need at least 2 replicates");
    if (n_particles < 1) throw std::invalid_argument("replicate_loglik: need at least one particle");
    model.domain.require_contains(theta);

    const auto reps = static_cast<std::size_t>(n_reps);
    Replicates out;
    out.loglik.resize(reps);
    out.seeds.resize(reps);
    std::vector<char> degenerate(reps, 0);

    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t r = begin; r < reps; r += stride) {
            const std::uint64_t seed = base_seed + r;
            const auto est = estimate_loglik(model, theta, y, n_particles, seed, scheme);
            out.loglik[r] = est.value;
            out.seeds[r] = seed;
            degenerate[r] = est.degenerate ? 1 : 0;
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(reps));
    if (threads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
    }

    out.degenerate.assign(degenerate.begin(), degenerate.end());
    out.n_degenerate = static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
    return out;
}

}  // namespace pfgpo
