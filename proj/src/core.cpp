#include "pfgpo/core.hpp"

#include <fmt/format.h>

#include <cmath>
#include <utility>

namespace pfgpo {

BoxDomain::BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.size() == 0) {
        throw std::invalid_argument("BoxDomain: bounds must be non-empty and of equal dimension");
    }
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
        if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
            throw std::invalid_argument(
                fmt::format("BoxDomain: invalid bounds [{}, {}] in dimension {}", lower_[i], upper_[i], i));
        }
    }
}

bool BoxDomain::contains(const ParamVector& theta) const {
    if (theta.size() != lower_.size()) return false;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (!std::isfinite(theta[i]) || theta[i] < lower_[i] || theta[i] > upper_[i]) return false;
    }
    return true;
}

ParamVector BoxDomain::clamp(const ParamVector& theta) const {
    return theta.cwiseMax(lower_).cwiseMin(upper_);
}

Eigen::VectorXd BoxDomain::to_unit(const ParamVector& theta) const {
    return (theta - lower_).cwiseQuotient(upper_ - lower_);
}

ParamVector BoxDomain::from_unit(const Eigen::VectorXd& u) const {
    ParamVector theta = lower_ + u.cwiseProduct(upper_ - lower_);
    // keep round-off from pushing boundary points outside the box
    return clamp(theta);
}

void BoxDomain::require_contains(const ParamVector& theta) const {
    if (theta.size() != lower_.size()) {
        throw DomainError(fmt::format("parameter has dimension {}, model expects {}", theta.size(), lower_.size()));
    }
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (!std::isfinite(theta[i]) || theta[i] < lower_[i] || theta[i] > upper_[i]) {
            throw DomainError(fmt::format("parameter component {} = {} outside domain [{}, {}]", i, theta[i],
                                          lower_[i], upper_[i]));
        }
    }
}

std::string to_string(const ParamVector& theta) {
    std::string out = "{";
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (i > 0) out += ", ";
        out += fmt::format("{:.6g}", theta[i]);
    }
    return out + "}";
}

}  // namespace pfgpo
