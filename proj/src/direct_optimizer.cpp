#include "pfgpo/direct_optimizer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pfgpo {

namespace {

// stand-in cost for -inf / NaN objective values; keeps hull slopes finite
constexpr double kBadCost = 1e300;

double third_power(int level) { return std::pow(3.0, -level); }

double half_diagonal(std::vector<int> levels) {
    // canonical summation order so equal-shaped rectangles get bitwise-equal measures
    std::sort(levels.begin(), levels.end());
    double sum = 0.0;
    for (int l : levels) sum += third_power(2 * l);
    return 0.5 * std::sqrt(sum);
}

}  // namespace

double Hyperrect::side(std::size_t i) const { return third_power(levels[i]); }

double Hyperrect::volume() const {
    double v = 1.0;
    for (int l : levels) v *= third_power(l);
    return v;
}

DirectSearch::DirectSearch(Objective objective, BoxDomain domain, DirectConfig config)
    : objective_(std::move(objective)), domain_(std::move(domain)), config_(config) {
    if (config_.max_evals < 1) throw std::invalid_argument("DIRECT: max_evals must be at least 1");
    if (config_.epsilon < 0.0) throw std::invalid_argument("DIRECT: epsilon must be non-negative");
    const auto d = static_cast<Eigen::Index>(domain_.dim());
    Eigen::VectorXd center = Eigen::VectorXd::Constant(d, 0.5);
    const double value = evaluate(center);
    add_rect(std::move(center), std::vector<int>(static_cast<std::size_t>(d), 0), value);
}

double DirectSearch::evaluate(const Eigen::VectorXd& unit_point) {
    const double value = objective_(domain_.from_unit(unit_point));
    ++n_evals_;
    return value;
}

double DirectSearch::cost(const Hyperrect& r) const {
    const double c = -r.value;
    return std::isfinite(c) ? c : kBadCost;
}

void DirectSearch::add_rect(Eigen::VectorXd center, std::vector<int> levels, double value) {
    Hyperrect r;
    r.center = std::move(center);
    r.measure = half_diagonal(levels);
    r.levels = std::move(levels);
    r.value = value;
    r.id = rects_.size();
    rects_.push_back(std::move(r));
    if (rects_.size() == 1 || cost(rects_.back()) < cost(rects_[best_])) best_ = rects_.size() - 1;
    trace_.push_back(rects_[best_].value);
}

std::vector<std::size_t> DirectSearch::potentially_optimal() const {
    // best rectangle of each size class among those that may still be divided
    struct Group {
        double measure;
        double cost;
        std::size_t index;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < rects_.size(); ++i) {
        const auto& r = rects_[i];
        if (*std::min_element(r.levels.begin(), r.levels.end()) >= config_.max_depth) continue;
        const double c = cost(r);
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) { return g.measure == r.measure; });
        if (it == groups.end()) {
            groups.push_back({r.measure, c, i});
        } else if (c < it->cost) {
            it->cost = c;
            it->index = i;
        }
    }
    std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) { return a.measure < b.measure; });

    const double f_min = cost(rects_[best_]);
    const double slack = config_.epsilon * std::max(std::abs(f_min), 1e-8);

    std::vector<std::size_t> selected;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        const auto& gj = groups[j];
        double k_low = -std::numeric_limits<double>::infinity();
        double k_up = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < j; ++i) {
            k_low = std::max(k_low, (gj.cost - groups[i].cost) / (gj.measure - groups[i].measure));
        }
        for (std::size_t i = j + 1; i < groups.size(); ++i) {
            k_up = std::min(k_up, (groups[i].cost - gj.cost) / (groups[i].measure - gj.measure));
        }
        if (!(k_up > 0.0) || k_low > k_up) continue;
        if (std::isfinite(k_up) && gj.cost - k_up * gj.measure > f_min - slack) continue;
        selected.push_back(gj.index);
    }
    // largest rectangles first
    std::reverse(selected.begin(), selected.end());
    return selected;
}

void DirectSearch::divide(std::size_t index) {
    const std::vector<int> levels = rects_[index].levels;
    const Eigen::VectorXd center = rects_[index].center;
    const int level = *std::min_element(levels.begin(), levels.end());
    const double delta = third_power(level) / 3.0;

    struct Probe {
        std::size_t dim;
        double best;
        Eigen::VectorXd lo_center, hi_center;
        double lo_value, hi_value;
    };
    std::vector<Probe> probes;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] != level) continue;
        Probe p{i, 0.0, center, center, 0.0, 0.0};
        const auto ei = static_cast<Eigen::Index>(i);
        p.lo_center[ei] -= delta;
        p.hi_center[ei] += delta;
        p.lo_value = evaluate(p.lo_center);
        p.hi_value = evaluate(p.hi_center);
        const double c_lo = std::isfinite(-p.lo_value) ? -p.lo_value : kBadCost;
        const double c_hi = std::isfinite(-p.hi_value) ? -p.hi_value : kBadCost;
        p.best = std::min(c_lo, c_hi);
        probes.push_back(std::move(p));
    }
    std::stable_sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) { return a.best < b.best; });

    std::vector<int> current = levels;
    for (auto& p : probes) {
        ++current[p.dim];
        add_rect(std::move(p.lo_center), current, p.lo_value);
        add_rect(std::move(p.hi_center), current, p.hi_value);
    }
    rects_[index].levels = current;
    rects_[index].measure = half_diagonal(current);
}

bool DirectSearch::step() {
    if (n_evals_ >= config_.max_evals) return false;
    const auto selected = potentially_optimal();
    if (selected.empty()) return false;
    for (std::size_t index : selected) {
        if (n_evals_ >= config_.max_evals) break;
        divide(index);
    }
    ++iterations_;
    return true;
}

void DirectSearch::run() {
    while (step()) {
    }
}

DirectResult DirectSearch::result() const {
    DirectResult out;
    out.theta_best = domain_.from_unit(rects_[best_].center);
    out.value_best = rects_[best_].value;
    out.n_evals = n_evals_;
    out.iterations = iterations_;
    out.incumbent_trace = trace_;
    return out;
}

DirectResult direct_maximize(const DirectSearch::Objective& objective, const BoxDomain& domain,
                             const DirectConfig& config) {
    DirectSearch search(objective, domain, config);
    search.run();
    return search.result();
}

namespace {

BoxDomain box2(double x0, double x1, double y0, double y1) {
    Eigen::VectorXd lo(2), hi(2);
    lo << x0, y0;
    hi << x1, y1;
    return {lo, hi};
}

}  // namespace

std::vector<TestFunction> direct_test_functions() {
    std::vector<TestFunction> fns;
    fns.push_back({"quadratic1d", BoxDomain(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)),
                   [](const ParamVector& t) { return -(t[0] - 0.3) * (t[0] - 0.3); }});
    fns.push_back({"sphere2d", box2(0.0, 1.0, 0.0, 1.0),
                   [](const ParamVector& t) { return -(t.array() - 0.7).square().sum(); }});
    fns.push_back({"camel6", box2(-3.0, 3.0, -2.0, 2.0), [](const ParamVector& t) {
                       const double x = t[0], y = t[1];
                       const double x2 = x * x, y2 = y * y;
                       return -((4.0 - 2.1 * x2 + x2 * x2 / 3.0) * x2 + x * y + (-4.0 + 4.0 * y2) * y2);
                   }});
    fns.push_back({"branin", box2(-5.0, 10.0, 0.0, 15.0), [](const ParamVector& t) {
                       const double pi = 3.14159265358979323846;
                       const double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, s = 10.0, tt = 1.0 / (8.0 * pi);
                       const double u = t[1] - b * t[0] * t[0] + c * t[0] - 6.0;
                       return -(u * u + s * (1.0 - tt) * std::cos(t[0]) + s);
                   }});
    fns.push_back({"goldstein-price", box2(-2.0, 2.0, -2.0, 2.0), [](const ParamVector& t) {
                       const double x = t[0], y = t[1];
                       const double a = 1.0 + (x + y + 1.0) * (x + y + 1.0) *
                                                  (19.0 - 14.0 * x + 3.0 * x * x - 14.0 * y + 6.0 * x * y + 3.0 * y * y);
                       const double b = 30.0 + (2.0 * x - 3.0 * y) * (2.0 * x - 3.0 * y) *
                                                   (18.0 - 32.0 * x + 12.0 * x * x + 48.0 * y - 36.0 * x * y + 27.0 * y * y);
                       return -a * b;
                   }});
    return fns;
}

const TestFunction& find_test_function(const std::string& name) {
    static const std::vector<TestFunction> registry = direct_test_functions();
    for (const auto& f : registry) {
        if (f.name == name) return f;
    }
    throw std::invalid_argument(fmt::format("unknown test function '{}'", name));
}

}  // namespace pfgpo
