// Bootstrap particle filter for log-likelihood estimation.
//
// For t = 1..T: resample (from t = 2 onward), propagate through the state
// transition, weight by the observation density. The estimate is
//
//   lhat = sum_t log( sum_i w_t^(i) ) - T log N
//
// computed entirely in log space.
#pragma once

#include "pfgpo/rng.hpp"
#include "pfgpo/ssm_models.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pfgpo {

enum class Resampling { systematic, multinomial };

Resampling parse_resampling(std::string_view name);
std::string_view to_string(Resampling scheme);

struct ParticleSystem {
    std::vector<double> states;
    std::vector<double> log_weights;  // unnormalized

    std::size_t size() const { return states.size(); }
    bool degenerate() const;
};

struct LogLikEstimate {
    double value = 0.0;  // -inf when degenerate
    int n_particles = 0;
    std::uint64_t seed = 0;
    std::vector<double> per_step_logsum;  // log sum_i w_t^(i), truncated at the degenerate step
    bool degenerate = false;
};

/// Ancestor indices drawn in proportion to exp(log_weights). Throws DegeneracyError if all are -inf.
std::vector<std::size_t> resample(std::span<const double> log_weights, Rng& rng,
                                  Resampling scheme = Resampling::systematic);
void resample_into(std::span<const double> log_weights, Rng& rng, Resampling scheme,
                   std::vector<std::size_t>& ancestors);

LogLikEstimate estimate_loglik(const SsmSpec& model, const ParamVector& theta, const ObservationSeries& y,
                               int n_particles, std::uint64_t seed, Resampling scheme = Resampling::systematic);

struct Replicates {
    std::vector<double> loglik;  // -inf for degenerate runs
    std::vector<std::uint64_t> seeds;
    std::vector<bool> degenerate;
    std::size_t n_degenerate = 0;

    /// Values of the non-degenerate replicates, in replicate order.
    std::vector<double> finite_values() const;
};

/// n_reps independent estimates with seeds base_seed, ..., base_seed + n_reps - 1.
/// Replicates are distributed over `threads` workers (0 = hardware concurrency);
/// results do not depend on the thread count.
Replicates replicate_loglik(const SsmSpec& model, const ParamVector& theta, const ObservationSeries& y,
                            int n_particles, int n_reps, std::uint64_t base_seed,
                            Resampling scheme = Resampling::systematic, unsigned threads = 0);

}  // namespace pfgpo
