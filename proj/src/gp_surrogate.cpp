#include "pfgpo/gp_surrogate.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace pfgpo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kSqrt3 = std::sqrt(3.0);
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double matern32_unit(double r) {
    const double s = kSqrt3 * r;
    return (1.0 + s) * std::exp(-s);
}

}  // namespace

void IterateSet::add(ParamVector theta, double value) {
    if (!thetas.empty() && theta.size() != thetas.front().size()) {
        throw std::invalid_argument("IterateSet: parameter dimension mismatch");
    }
    thetas.push_back(std::move(theta));
    loglik.push_back(value);
}

Eigen::Map<const Eigen::VectorXd> IterateSet::values() const {
    return {loglik.data(), static_cast<Eigen::Index>(loglik.size())};
}

double matern32(const ParamVector& a, const ParamVector& b, const GpHyperparams& hyper) {
    if (a.size() != b.size() || a.size() != hyper.length_scales.size()) {
        throw std::invalid_argument("matern32: dimension mismatch");
    }
    const double r = (a - b).cwiseQuotient(hyper.length_scales).norm();
    return hyper.signal_var * matern32_unit(r);
}

Eigen::MatrixXd gram_matrix(const IterateSet& data, const GpHyperparams& hyper) {
    const auto k = static_cast<Eigen::Index>(data.k());
    Eigen::MatrixXd gram(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        gram(i, i) = hyper.signal_var + hyper.noise_var;
        for (Eigen::Index j = 0; j < i; ++j) {
            gram(i, j) = gram(j, i) = matern32(data.thetas[i], data.thetas[j], hyper);
        }
    }
    return gram;
}

JitteredCholesky jittered_cholesky(const Eigen::MatrixXd& gram) {
    const double scale = gram.diagonal().mean();
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};

    Eigen::MatrixXd work = gram;
    for (double rel = 1e-10; rel <= 1.0001e-4; rel *= 10.0) {
        const double jitter = rel * scale;
        work.diagonal() = gram.diagonal().array() + jitter;
        llt.compute(work);
        if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
    }
    throw ConditioningError("Gram matrix is not positive definite even with maximal jitter");
}

double log_marginal_likelihood(const IterateSet& data, const GpHyperparams& hyper) {
    if (data.empty()) throw std::invalid_argument("log_marginal_likelihood: empty data");
    const auto chol = jittered_cholesky(gram_matrix(data, hyper));
    const Eigen::VectorXd resid = data.values().array() - hyper.mean_const;
    const Eigen::VectorXd half = chol.lower.triangularView<Eigen::Lower>().solve(resid);
    const auto k = static_cast<double>(data.k());
    return -0.5 * half.squaredNorm() - chol.lower.diagonal().array().log().sum() - 0.5 * k * kLog2Pi;
}

GpHyperparams default_hyperparams(const IterateSet& data, const BoxDomain& domain, double noise_floor) {
    if (data.empty()) throw std::invalid_argument("default_hyperparams: empty data");
    const auto v = data.values();
    GpHyperparams h;
    h.mean_const = v.mean();
    const double var = data.k() > 1 ? (v.array() - h.mean_const).square().sum() / static_cast<double>(data.k() - 1)
                                    : 0.0;
    h.signal_var = std::max(var, 1.0);
    h.length_scales = 0.2 * domain.width();
    h.noise_var = std::max(0.01 * h.signal_var, noise_floor);
    return h;
}

GpPosterior::GpPosterior(IterateSet train, GpHyperparams hyper) : train_(std::move(train)), hyper_(std::move(hyper)) {
    if (train_.empty()) throw std::invalid_argument("GpPosterior: no training data");
    if (!(hyper_.signal_var > 0.0) || !(hyper_.noise_var >= 0.0) || (hyper_.length_scales.array() <= 0.0).any()) {
        throw std::invalid_argument("GpPosterior: invalid hyperparameters");
    }
    auto chol = jittered_cholesky(gram_matrix(train_, hyper_));
    chol_ = std::move(chol.lower);
    jitter_ = chol.jitter;

    const Eigen::VectorXd resid = train_.values().array() - hyper_.mean_const;
    const Eigen::VectorXd half = chol_.triangularView<Eigen::Lower>().solve(resid);
    alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(half);
    const auto k = static_cast<double>(train_.k());
    lml_ = -0.5 * half.squaredNorm() - chol_.diagonal().array().log().sum() - 0.5 * k * kLog2Pi;
}

GpPrediction GpPosterior::predict(const ParamVector& theta) const {
    const auto k = static_cast<Eigen::Index>(train_.k());
    Eigen::VectorXd cross(k);
    for (Eigen::Index j = 0; j < k; ++j) cross[j] = matern32(theta, train_.thetas[j], hyper_);

    GpPrediction out;
    out.mu = hyper_.mean_const + cross.dot(alpha_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(cross);
    out.var_latent = std::max(hyper_.signal_var - v.squaredNorm(), 0.0);
    out.var_observed = out.var_latent + hyper_.noise_var;
    return out;
}

namespace {

// Empirical-Bayes objective on standardized data: inputs in the unit cube,
// outputs centred and scaled. Search coordinates are log(length / width) per
// dimension followed by log(noise_var / signal_var); the mean and signal
// variance are profiled out.
class ProfiledEvidence {
public:
    ProfiledEvidence(const IterateSet& data, const BoxDomain& domain) : k_(static_cast<Eigen::Index>(data.k())) {
        const auto d = static_cast<Eigen::Index>(domain.dim());
        const auto v = data.values();
        y_mean_ = v.mean();
        y_scale_ = std::sqrt((v.array() - y_mean_).square().sum() / static_cast<double>(std::max<Eigen::Index>(k_ - 1, 1)));
        ys_ = (v.array() - y_mean_) / y_scale_;

        sq_diffs_.reserve(static_cast<std::size_t>(d));
        std::vector<Eigen::VectorXd> unit;
        unit.reserve(data.k());
        for (const auto& th : data.thetas) unit.push_back(domain.to_unit(th));
        for (Eigen::Index dim = 0; dim < d; ++dim) {
            Eigen::MatrixXd sq(k_, k_);
            for (Eigen::Index i = 0; i < k_; ++i) {
                for (Eigen::Index j = 0; j < k_; ++j) {
                    const double diff = unit[i][dim] - unit[j][dim];
                    sq(i, j) = diff * diff;
                }
            }
            sq_diffs_.push_back(std::move(sq));
        }
    }

    Eigen::Index dim() const { return static_cast<Eigen::Index>(sq_diffs_.size()); }
    double y_mean() const { return y_mean_; }
    double y_scale() const { return y_scale_; }

    struct Profile {
        double log_evidence = kNegInf;
        double mean = 0.0;    // standardized units
        double signal = 0.0;  // standardized units
    };

    Profile evaluate(const Eigen::VectorXd& z) const {
        Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(k_, k_);
        for (Eigen::Index dim = 0; dim < this->dim(); ++dim) {
            r2 += sq_diffs_[static_cast<std::size_t>(dim)] * std::exp(-2.0 * z[dim]);
        }
        const double ratio = std::exp(z[this->dim()]);
        Eigen::MatrixXd corr = r2.unaryExpr([](double s) { return matern32_unit(std::sqrt(s)); });
        corr.diagonal().array() += ratio;

        Profile out;
        JitteredCholesky chol;
        try {
            chol = jittered_cholesky(corr);
        } catch (const ConditioningError&) {
            return out;
        }
        const auto lower = chol.lower.triangularView<Eigen::Lower>();
        const Eigen::VectorXd a = lower.solve(Eigen::VectorXd::Ones(k_));
        const Eigen::VectorXd b = lower.solve(ys_);
        out.mean = a.dot(b) / a.squaredNorm();
        const double quad = (b - out.mean * a).squaredNorm();
        out.signal = quad / static_cast<double>(k_);
        if (!(out.signal > 0.0) || !std::isfinite(out.signal)) return out;
        const auto k = static_cast<double>(k_);
        out.log_evidence =
            -0.5 * k * std::log(out.signal) - chol.lower.diagonal().array().log().sum() - 0.5 * k * (1.0 + kLog2Pi);
        return out;
    }

private:
    Eigen::Index k_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    Eigen::VectorXd ys_;
    std::vector<Eigen::MatrixXd> sq_diffs_;
};

struct SearchBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::VectorXd clamp(const Eigen::VectorXd& z) const { return z.cwiseMax(lower).cwiseMin(upper); }
};

struct NelderMeadContext {
    const ProfiledEvidence* evidence;
    const SearchBox* box;
};

// GSL minimizes; out-of-box points are evaluated at their projection with a quadratic penalty.
double negative_evidence(const gsl_vector* x, void* params) {
    const auto* ctx = static_cast<const NelderMeadContext*>(params);
    Eigen::VectorXd z(static_cast<Eigen::Index>(x->size));
    for (std::size_t i = 0; i < x->size; ++i) z[static_cast<Eigen::Index>(i)] = gsl_vector_get(x, i);
    const Eigen::VectorXd zc = ctx->box->clamp(z);
    const double value = ctx->evidence->evaluate(zc).log_evidence;
    if (!std::isfinite(value)) return std::numeric_limits<double>::max() / 4;
    return -value + 1e3 * (z - zc).squaredNorm();
}

struct GslVectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct GslMinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

Eigen::VectorXd nelder_mead(const ProfiledEvidence& evidence, const SearchBox& box, const Eigen::VectorXd& start,
                            const GpFitConfig& config) {
    const auto n = static_cast<std::size_t>(start.size());
    NelderMeadContext ctx{&evidence, &box};
    gsl_multimin_function fn{&negative_evidence, n, &ctx};

    std::unique_ptr<gsl_vector, GslVectorDeleter> x(gsl_vector_alloc(n));
    std::unique_ptr<gsl_vector, GslVectorDeleter> step(gsl_vector_alloc(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        gsl_vector_set(x.get(), i, start[idx]);
        gsl_vector_set(step.get(), i, 0.15 * (box.upper[idx] - box.lower[idx]));
    }
    std::unique_ptr<gsl_multimin_fminimizer, GslMinimizerDeleter> minimizer(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
    gsl_multimin_fminimizer_set(minimizer.get(), &fn, x.get(), step.get());

    for (int iter = 0; iter < config.max_local_iterations; ++iter) {
        if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(minimizer.get()), config.simplex_tolerance) ==
            GSL_SUCCESS) {
            break;
        }
    }
    Eigen::VectorXd best(start.size());
    for (std::size_t i = 0; i < n; ++i) best[static_cast<Eigen::Index>(i)] = gsl_vector_get(minimizer->x, i);
    return box.clamp(best);
}

// Starting points after the caller's initialization: (relative length-scale, noise ratio).
constexpr std::array<std::pair<double, double>, 4> kStartGrid{{{0.2, 1e-2}, {0.05, 1e-3}, {0.5, 1e-1}, {1.5, 1e-4}}};

double halton(std::size_t index, std::size_t base) {
    double f = 1.0, r = 0.0;
    for (std::size_t i = index; i > 0; i /= base) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
    }
    return r;
}

}  // namespace

GpPosterior fit(const IterateSet& data, const BoxDomain& domain, const GpHyperparams& init, const GpFitConfig& config) {
    if (data.empty()) throw std::invalid_argument("fit: empty data");
    if (data.thetas.front().size() != static_cast<Eigen::Index>(domain.dim())) {
        throw std::invalid_argument("fit: parameter dimension does not match domain");
    }
    if (data.k() < config.k_min) return GpPosterior(data, init);

    const ProfiledEvidence evidence(data, domain);
    if (!(evidence.y_scale() > 0.0)) return GpPosterior(data, init);  // constant data: nothing to learn

    // silence GSL's abort-on-error handler; failures surface through return codes
    static const auto previous_handler [[maybe_unused]] = gsl_set_error_handler_off();

    const Eigen::Index d = evidence.dim();
    SearchBox box;
    box.lower.resize(d + 1);
    box.upper.resize(d + 1);
    box.lower.head(d).setConstant(std::log(config.min_rel_length));
    box.upper.head(d).setConstant(std::log(config.max_rel_length));
    box.lower[d] = std::log(config.min_noise_ratio);
    box.upper[d] = std::log(config.max_noise_ratio);

    std::vector<Eigen::VectorXd> starts;
    {
        Eigen::VectorXd z(d + 1);
        z.head(d) = init.length_scales.cwiseQuotient(domain.width()).array().log();
        z[d] = std::log(std::max(init.noise_var / init.signal_var, config.min_noise_ratio));
        starts.push_back(box.clamp(z));
    }
    for (std::size_t s = 0; static_cast<int>(starts.size()) < config.n_starts; ++s) {
        Eigen::VectorXd z(d + 1);
        if (s < kStartGrid.size()) {
            z.head(d).setConstant(std::log(kStartGrid[s].first));
            z[d] = std::log(kStartGrid[s].second);
        } else {
            constexpr std::array<std::size_t, 8> primes{2, 3, 5, 7, 11, 13, 17, 19};
            for (Eigen::Index i = 0; i <= d; ++i) {
                const double h = halton(s + 1, primes[static_cast<std::size_t>(i) % primes.size()]);
                z[i] = box.lower[i] + h * (box.upper[i] - box.lower[i]);
            }
        }
        starts.push_back(z);
    }

    auto to_hyper = [&](const Eigen::VectorXd& z) -> std::optional<GpHyperparams> {
        const auto profile = evidence.evaluate(z);
        if (!std::isfinite(profile.log_evidence)) return std::nullopt;
        GpHyperparams h;
        h.mean_const = evidence.y_mean() + evidence.y_scale() * profile.mean;
        h.signal_var = evidence.y_scale() * evidence.y_scale() * profile.signal;
        h.length_scales = z.head(d).array().exp().matrix().cwiseProduct(domain.width());
        h.noise_var = std::max(std::exp(z[d]) * h.signal_var, config.noise_floor);
        return h;
    };

    GpHyperparams best = init;
    double best_lml = kNegInf;
    try {
        best_lml = log_marginal_likelihood(data, init);
    } catch (const ConditioningError&) {
    }
    for (const auto& start : starts) {
        const auto candidate = to_hyper(nelder_mead(evidence, box, start, config));
        if (!candidate) continue;
        double lml = kNegInf;
        try {
            lml = log_marginal_likelihood(data, *candidate);
        } catch (const ConditioningError&) {
            continue;
        }
        if (lml > best_lml) {
            best_lml = lml;
            best = *candidate;
        }
    }
    return GpPosterior(data, best);
}

}  // namespace pfgpo
