// DIRECT (DIviding RECTangles) global maximization over a box.
//
// The box is mapped to the unit hypercube. Each iteration selects the
// potentially optimal rectangles (lower-right convex hull of (size, value)
// with an epsilon-improvement condition on the incumbent) and trisects them
// along their longest sides. No randomness is involved.
#pragma once

#include "pfgpo/core.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace pfgpo {

struct DirectConfig {
    int max_evals = 500;
    double epsilon = 1e-4;
    int max_depth = 30;
};

struct Hyperrect {
    Eigen::VectorXd center;   // unit-cube coordinates
    std::vector<int> levels;  // side length in dimension i is 3^-levels[i]
    double value = 0.0;       // objective at the center
    double measure = 0.0;     // half the diagonal
    std::size_t id = 0;       // creation order

    double side(std::size_t i) const;
    double volume() const;
};

struct DirectResult {
    ParamVector theta_best;
    double value_best = 0.0;
    int n_evals = 0;
    int iterations = 0;
    std::vector<double> incumbent_trace;  // best value after each evaluation
};

class DirectSearch {
public:
    using Objective = std::function<double(const ParamVector&)>;

    DirectSearch(Objective objective, BoxDomain domain, DirectConfig config = {});

    /// One selection-and-division round. Returns false once the evaluation
    /// budget is spent or no rectangle can be divided further.
    bool step();
    void run();

    const std::vector<Hyperrect>& rects() const { return rects_; }
    int n_evals() const { return n_evals_; }
    DirectResult result() const;

private:
    double evaluate(const Eigen::VectorXd& unit_point);
    double cost(const Hyperrect& r) const;
    std::vector<std::size_t> potentially_optimal() const;
    void divide(std::size_t index);
    void add_rect(Eigen::VectorXd center, std::vector<int> levels, double value);

    Objective objective_;
    BoxDomain domain_;
    DirectConfig config_;
    std::vector<Hyperrect> rects_;
    int n_evals_ = 0;
    int iterations_ = 0;
    std::size_t best_ = 0;
    std::vector<double> trace_;
};

DirectResult direct_maximize(const DirectSearch::Objective& objective, const BoxDomain& domain,
                             const DirectConfig& config = {});

/// Standard low-dimensional test problems (negated where needed so that they are maximized).
struct TestFunction {
    std::string name;
    BoxDomain domain;
    std::function<double(const ParamVector&)> fn;
};

std::vector<TestFunction> direct_test_functions();
const TestFunction& find_test_function(const std::string& name);

}  // namespace pfgpo
