// Simultaneous-perturbation stochastic approximation, ascent form.
#pragma once

#include "pfgpo/core.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace pfgpo {

struct SpsaConfig {
    double a = 0.03;
    double c = 0.04;
    double alpha = 0.602;
    double gamma = 0.101;
    std::optional<double> A;  // stability constant; 10% of K when unset
    int K = 100;

    double stability() const { return A.value_or(0.1 * K); }
    void validate() const;
};

struct SpsaTrace {
    std::vector<ParamVector> iterates;  // theta_0, theta_1, ..., theta_K
    std::vector<int> evals;             // objective evaluations consumed when iterates[i] was emitted
    std::vector<std::uint64_t> seeds;   // objective seed used at each iteration
    int loglik_evals = 0;
    int skipped = 0;                    // iterations dropped because an evaluation was -inf / NaN
};

using NoisyObjective = std::function<double(const ParamVector& theta, std::uint64_t seed)>;

/// Both evaluations of one iteration share a seed (common random numbers).
SpsaTrace run_spsa(const NoisyObjective& objective, const ParamVector& theta0, const BoxDomain& domain,
                   const SpsaConfig& config, std::uint64_t seed);

}  // namespace pfgpo
