// Shared value types: parameter vectors, box domains and the error hierarchy.
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pfgpo {

/// Static model parameter vector (theta).
using ParamVector = Eigen::VectorXd;

struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// All importance weights collapsed to zero at some step.
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Gram matrix could not be factorized even with maximal jitter.
struct ConditioningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/**
 * Closed axis-aligned box [lower, upper] in R^d.
 *
 * Also provides the affine map to and from the unit hypercube, which the
 * surrogate model and DIRECT both work in.
 */
class BoxDomain {
public:
    BoxDomain() = default;
    BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper);

    std::size_t dim() const { return static_cast<std::size_t>(lower_.size()); }
    const Eigen::VectorXd& lower() const { return lower_; }
    const Eigen::VectorXd& upper() const { return upper_; }
    Eigen::VectorXd width() const { return upper_ - lower_; }
    Eigen::VectorXd center() const { return 0.5 * (lower_ + upper_); }

    bool contains(const ParamVector& theta) const;
    ParamVector clamp(const ParamVector& theta) const;

    Eigen::VectorXd to_unit(const ParamVector& theta) const;
    ParamVector from_unit(const Eigen::VectorXd& u) const;

    /// Throws DomainError naming the offending component.
    void require_contains(const ParamVector& theta) const;

private:
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
};

std::string to_string(const ParamVector& theta);

}  // namespace pfgpo
