#include "cli.hpp"

#include "pfgpo/gpo_driver.hpp"
#include "pfgpo/kalman_oracle.hpp"
#include "pfgpo/spsa.hpp"
#include "pfgpo/stats.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace pfgpo::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// I/O failures and malformed input files; reported with the runtime exit code.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string join_num(const Eigen::VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += num(v[i]);
    }
    return s;
}

std::string theta_header(std::size_t d) {
    std::string s;
    for (std::size_t i = 1; i <= d; ++i) s += fmt::format("{}theta{}", i > 1 ? "," : "", i);
    return s;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, sep)) {
        while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
        while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
        out.push_back(tok);
    }
    return out;
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return v;
}

ParamVector parse_theta(const std::string& text, const SsmSpec& model) {
    const auto parts = split(text);
    if (static_cast<int>(parts.size()) != model.param_dim) {
        throw std::invalid_argument(fmt::format("model '{}' takes {} parameter(s), got '{}'", model.name,
                                                model.param_dim, text));
    }
    ParamVector theta(model.param_dim);
    for (int i = 0; i < model.param_dim; ++i) {
        const auto v = parse_double(parts[static_cast<std::size_t>(i)]);
        if (!v) throw std::invalid_argument(fmt::format("cannot parse parameter value '{}'", parts[i]));
        theta[i] = *v;
    }
    model.domain.require_contains(theta);
    return theta;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::optional<std::size_t> column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    }
};

Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path));
    Table t;
    std::string line;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (first) {
            first = false;
            if (!parse_double(cells.front())) {
                t.header = cells;
                continue;
            }
            for (std::size_t i = 0; i < cells.size(); ++i) t.header.push_back(fmt::format("c{}", i));
        }
        if (cells.size() != t.header.size()) {
            throw IoError(fmt::format("{}:{}: expected {} fields, found {}", path, lineno, t.header.size(), cells.size()));
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            const auto v = parse_double(c);
            if (!v) throw IoError(fmt::format("{}:{}: cannot parse '{}'", path, lineno, c));
            row.push_back(*v);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.rows.empty()) throw IoError(fmt::format("'{}' contains no data rows", path));
    return t;
}

// Observations are the `y` column, or the only column of a single-column file.
ObservationSeries read_series(const std::string& path) {
    const auto t = read_csv(path);
    std::size_t col = 0;
    if (const auto c = t.column("y")) {
        col = *c;
    } else if (t.header.size() != 1) {
        throw IoError(fmt::format("'{}' has no 'y' column", path));
    }
    std::vector<double> y;
    for (const auto& r : t.rows) y.push_back(r[col]);
    try {
        return ObservationSeries(std::move(y));
    } catch (const std::invalid_argument& e) {
        throw IoError(fmt::format("'{}': {}", path, e.what()));
    }
}

// Iterate files: columns theta1..thetad and loglik_hat (or loglik).
IterateSet read_iterates(const std::string& path, std::size_t d) {
    const auto t = read_csv(path);
    std::vector<std::size_t> cols;
    for (std::size_t i = 1; i <= d; ++i) {
        const auto c = t.column(fmt::format("theta{}", i));
        if (!c) throw IoError(fmt::format("'{}' has no 'theta{}' column", path, i));
        cols.push_back(*c);
    }
    auto value_col = t.column("loglik_hat");
    if (!value_col) value_col = t.column("loglik");
    if (!value_col) throw IoError(fmt::format("'{}' has no 'loglik_hat' column", path));
    IterateSet data;
    for (const auto& r : t.rows) {
        ParamVector theta(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) theta[static_cast<Eigen::Index>(i)] = r[cols[i]];
        data.add(theta, r[*value_col]);
    }
    return data;
}

class Output {
public:
    explicit Output(const fs::path& path) : path_(path), file_(path, std::ios::binary | std::ios::trunc) {
        if (!file_) throw IoError(fmt::format("cannot write '{}'", path.string()));
    }
    ~Output() noexcept(false) {
        if (std::uncaught_exceptions() == 0) {
            file_.flush();
            if (!file_) throw IoError(fmt::format("error writing '{}'", path_.string()));
        }
    }
    template <class... Args>
    void line(fmt::format_string<Args...> f, Args&&... args) {
        file_ << fmt::format(f, std::forward<Args>(args)...) << '\n';
    }
    std::ofstream& stream() { return file_; }

private:
    fs::path path_;
    std::ofstream file_;
};

void write_json(const fs::path& path, const json& j) {
    Output o(path);
    o.stream() << j.dump(2) << '\n';
}

json json_num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json json_vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json_num(v[i]));
    return a;
}

json json_hyper(const GpHyperparams& h) {
    return {{"mean_const", json_num(h.mean_const)},
            {"signal_var", json_num(h.signal_var)},
            {"length_scales", json_vec(h.length_scales)},
            {"noise_var", json_num(h.noise_var)}};
}

fs::path make_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir, ec.message()));
    return fs::path(dir);
}

std::string default_theta(const SsmSpec& m, bool truth) {
    if (m.name == "lgss") return truth ? "0.5" : "-0.98";
    return truth ? "0.9,0.2" : "0.5,0.5";
}

int default_iterations(const SsmSpec& m) { return m.name == "lgss" ? 50 : 300; }

// ---------------------------------------------------------------- subcommands

struct Common {
    std::string model = "lgss";
    std::string data;
    std::string out;
    std::uint64_t seed = 0;
    int particles = 1000;
    std::string resampling = "systematic";
};

void add_model(CLI::App* sub, Common& c) {
    sub->add_option("--model", c.model, "State-space model")
        ->check(CLI::IsMember(model_names()))
        ->capture_default_str();
}

void add_seed(CLI::App* sub, Common& c) { sub->add_option("--seed", c.seed, "Random seed")->required(); }

void add_particles(CLI::App* sub, Common& c) {
    sub->add_option("--particles", c.particles, "Number of particles")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--resampling", c.resampling, "Resampling scheme")
        ->check(CLI::IsMember({"systematic", "multinomial"}))
        ->capture_default_str();
}

struct SimulateOpts : Common {
    std::string theta;
    std::size_t T = 250;
};

void cmd_simulate(const SimulateOpts& o, std::ostream&) {
    const auto model = make_model(o.model);
    const auto theta = parse_theta(o.theta.empty() ? default_theta(model, true) : o.theta, model);
    const auto d = simulate(model, theta, o.T, o.seed);
    Output out(o.out);
    out.line("t,x,y");
    for (std::size_t t = 0; t < o.T; ++t) out.line("{},{},{}", t + 1, num(d.states[t]), num(d.observations.y[t]));
}

struct PfOpts : Common {
    std::string theta;
    int reps = 1;
    unsigned threads = 0;
};

void cmd_pf_loglik(const PfOpts& o, std::ostream& stdout_) {
    const auto model = make_model(o.model);
    const auto theta = parse_theta(o.theta, model);
    const auto y = read_series(o.data);
    const auto scheme = parse_resampling(o.resampling);

    std::vector<double> values;
    std::vector<std::uint64_t> seeds;
    std::vector<bool> degenerate;
    if (o.reps == 1) {
        const auto est = estimate_loglik(model, theta, y, o.particles, o.seed, scheme);
        values = {est.value};
        seeds = {o.seed};
        degenerate = {est.degenerate};
    } else {
        const auto r = replicate_loglik(model, theta, y, o.particles, o.reps, o.seed, scheme, o.threads);
        values = r.loglik;
        seeds = r.seeds;
        degenerate = r.degenerate;
    }
    auto emit = [&](auto&& write) {
        write("rep,seed,loglik,degenerate");
        for (std::size_t i = 0; i < values.size(); ++i) {
            write(fmt::format("{},{},{},{}", i, seeds[i], num(values[i]), degenerate[i] ? 1 : 0));
        }
    };
    if (o.out.empty()) {
        emit([&](const std::string& s) { stdout_ << s << '\n'; });
    } else {
        Output out(o.out);
        emit([&](const std::string& s) { out.line("{}", s); });
    }
}

struct KalmanOpts : Common {
    int grid = 201;
};

void cmd_kalman_grid(const KalmanOpts& o, std::ostream& stdout_) {
    const auto g = grid_mle(read_series(o.data), o.grid);
    stdout_ << "theta_mle,loglik\n" << num(g.theta) << ',' << num(g.value) << '\n';
}

struct GpoOpts : Common {
    std::string theta1;
    std::optional<int> iters;
    double zeta = 0.01;
    int inner_evals = 500;
    std::vector<int> surface_at;
    int grid = 101;
};

void cmd_gpo(const GpoOpts& o, std::ostream& stdout_) {
    const auto model = make_model(o.model);
    const auto y = read_series(o.data);
    GpoConfig cfg;
    cfg.K = o.iters.value_or(default_iterations(model));
    cfg.N = o.particles;
    cfg.theta1 = parse_theta(o.theta1.empty() ? default_theta(model, false) : o.theta1, model);
    cfg.zeta = o.zeta;
    cfg.seed = o.seed;
    cfg.resampling = parse_resampling(o.resampling);
    cfg.inner_max_evals = o.inner_evals;
    cfg.snapshot_iterations = o.surface_at;
    for (int k : o.surface_at) {
        if (k < 1 || k > cfg.K) throw std::invalid_argument(fmt::format("--surface-at {} outside 1..{}", k, cfg.K));
    }
    if (!o.surface_at.empty() && model.param_dim > 2) {
        throw std::invalid_argument("surface dumps need a model with at most 2 parameters");
    }
    if (o.grid < 2) throw std::invalid_argument("--grid must be at least 2");
    cfg.validate(model.domain);

    const auto dir = make_out_dir(o.out);
    const auto res = run_gpo(model, y, cfg);
    const auto d = static_cast<std::size_t>(model.param_dim);

    {
        Output out(dir / "iterates.csv");
        out.line("k,{},loglik_hat,mu_max,ei_max,degenerate", theta_header(d));
        for (const auto& r : res.per_iteration) {
            out.line("{},{},{},{},{},{}", r.k, join_num(r.theta), num(r.loglik_hat), num(r.mu_max), num(r.ei_max),
                     r.degenerate ? 1 : 0);
        }
    }
    for (const auto& snap : res.snapshots) {
        Output out(dir / fmt::format("surface_{}.csv", snap.k));
        out.line("{},mu,sigma,ei", theta_header(d));
        for (const auto& row : surface_grid(snap.posterior, model.domain, o.grid, cfg.zeta)) {
            out.line("{},{},{},{}", join_num(row.theta), num(row.mu), num(row.sigma), num(row.ei));
        }
    }
    const auto& last = res.per_iteration.back();
    json j = {{"model", model.name},
              {"theta_hat", json_vec(res.theta_hat)},
              {"mu_hat", json_num(res.mu_hat)},
              {"hyperparameters", json_hyper(res.final_posterior->hyper())},
              {"mu_max", json_num(last.mu_max)},
              {"ei_max", json_num(last.ei_max)},
              {"iterations", cfg.K},
              {"particles", cfg.N},
              {"theta1", json_vec(cfg.theta1)},
              {"zeta", cfg.zeta},
              {"seed", cfg.seed},
              {"resampling", std::string(to_string(cfg.resampling))},
              {"loglik_evaluations", res.pf_evaluations},
              {"degenerate_evaluations", res.n_degenerate}};
    write_json(dir / "result.json", j);
    stdout_ << "theta_hat," << join_num(res.theta_hat) << '\n';
}

struct SpsaOpts : Common {
    std::string theta0;
    int iters = 150;
    double a = 0.03;
    double c = 0.04;
    double alpha = 0.602;
    double gamma = 0.101;
    std::optional<double> A;
};

void cmd_spsa(const SpsaOpts& o, std::ostream& stdout_) {
    const auto model = make_model(o.model);
    const auto y = read_series(o.data);
    const auto theta0 = parse_theta(o.theta0.empty() ? default_theta(model, false) : o.theta0, model);
    SpsaConfig cfg;
    cfg.a = o.a;
    cfg.c = o.c;
    cfg.alpha = o.alpha;
    cfg.gamma = o.gamma;
    cfg.A = o.A;
    cfg.K = o.iters;
    cfg.validate();
    const auto scheme = parse_resampling(o.resampling);
    const auto trace = run_spsa(
        [&](const ParamVector& theta, std::uint64_t seed) {
            return estimate_loglik(model, theta, y, o.particles, seed, scheme).value;
        },
        theta0, model.domain, cfg, o.seed);
    Output out(o.out);
    out.line("iter,{},evals", theta_header(static_cast<std::size_t>(model.param_dim)));
    for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
        out.line("{},{},{}", k, join_num(trace.iterates[k]), trace.evals[k]);
    }
    stdout_ << "theta_final," << join_num(trace.iterates.back()) << '\n';
}

struct DirectOpts {
    std::string fn;
    int max_evals = 500;
    double epsilon = 1e-4;
};

void cmd_direct_test(const DirectOpts& o, std::ostream& stdout_) {
    const auto& f = find_test_function(o.fn);
    const auto res = direct_maximize(f.fn, f.domain, {o.max_evals, o.epsilon, DirectConfig{}.max_depth});
    stdout_ << theta_header(f.domain.dim()) << ",value,n_evals\n";
    stdout_ << join_num(res.theta_best) << ',' << num(res.value_best) << ',' << res.n_evals << '\n';
}

struct DumpOpts : Common {
    std::string iterates;
    int grid = 101;
    double zeta = 0.01;
    bool fit_hyper = true;
};

GpPosterior dump_posterior(const DumpOpts& o, const SsmSpec& model) {
    const auto data = read_iterates(o.iterates, static_cast<std::size_t>(model.param_dim));
    for (const auto& t : data.thetas) model.domain.require_contains(t);
    const auto init = default_hyperparams(data, model.domain);
    if (!o.fit_hyper) return GpPosterior(data, init);
    return fit(data, model.domain, init);
}

void cmd_gp_dump(const DumpOpts& o, bool ei) {
    const auto model = make_model(o.model);
    if (o.grid < 2) throw std::invalid_argument("--grid must be at least 2");
    const auto post = dump_posterior(o, model);
    const auto rows = surface_grid(post, model.domain, o.grid, o.zeta);
    Output out(o.out);
    const auto d = static_cast<std::size_t>(model.param_dim);
    out.line("{},{}", theta_header(d), ei ? "ei" : "mu,sigma");
    for (const auto& r : rows) {
        if (ei) {
            out.line("{},{}", join_num(r.theta), num(r.ei));
        } else {
            out.line("{},{},{}", join_num(r.theta), num(r.mu), num(r.sigma));
        }
    }
}

struct StudyOpts : Common {
    std::string theta;
    int reps = 1000;
    unsigned threads = 0;
    int null_reps = stats::kDefaultNullReplicates;
};

void cmd_replicate_study(const StudyOpts& o, std::ostream& stdout_) {
    const auto model = make_model(o.model);
    const auto theta = parse_theta(o.theta.empty() ? default_theta(model, true) : o.theta, model);
    const auto y = read_series(o.data);
    if (o.reps < 20) throw std::invalid_argument("replicate-study needs --reps >= 20");
    const auto dir = make_out_dir(o.out);

    const auto r = replicate_loglik(model, theta, y, o.particles, o.reps, o.seed, parse_resampling(o.resampling),
                                    o.threads);
    {
        Output out(dir / "replicates.csv");
        out.line("rep,seed,loglik,degenerate");
        for (std::size_t i = 0; i < r.loglik.size(); ++i) {
            out.line("{},{},{},{}", i, r.seeds[i], num(r.loglik[i]), r.degenerate[i] ? 1 : 0);
        }
    }
    const auto finite = r.finite_values();
    json j = {{"model", model.name},
              {"theta", json_vec(theta)},
              {"particles", o.particles},
              {"reps", o.reps},
              {"seed", o.seed},
              {"degenerate", r.n_degenerate}};
    if (finite.size() >= 20) {
        const auto m = stats::moments(finite);
        const auto norm = stats::lilliefors_test(finite, o.null_reps);
        j["mean"] = json_num(m.mean);
        j["std"] = json_num(m.stddev);
        j["skewness"] = json_num(m.skewness);
        j["kurtosis"] = json_num(m.kurtosis);
        j["normality"] = {{"test", "lilliefors"},
                          {"statistic", json_num(norm.statistic)},
                          {"p_value", json_num(norm.p_value)},
                          {"null_replicates", norm.null_replicates}};
        Output out(dir / "qq.csv");
        out.line("theoretical,sample");
        for (const auto& q : stats::qq_normal(finite)) out.line("{},{}", num(q.theoretical), num(q.sample));
        if (model.name == "lgss") {
            const double exact = kalman_loglik(theta, y);
            j["kalman_loglik"] = json_num(exact);
            j["bias"] = json_num(m.mean - exact);
            j["bias_bound"] = json_num(3.0 * m.stddev / std::sqrt(static_cast<double>(finite.size())));
            // log-normal correction: E[lhat] is about l - var / 2
            j["bias_variance_corrected"] = json_num(m.mean + 0.5 * m.stddev * m.stddev - exact);
        } else {
            j["kalman_loglik"] = nullptr;
            j["bias"] = nullptr;
        }
    } else {
        throw DegeneracyError(fmt::format("only {} of {} replicates are finite", finite.size(), o.reps));
    }
    write_json(dir / "summary.json", j);
    stdout_ << "mean," << num(j["mean"].get<double>()) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Particle-filter likelihood estimation and Gaussian-process optimisation"};
    app.name(args.empty() ? "pfgpo" : fs::path(args.front()).filename().string());
    app.require_subcommand(1);

    std::function<void()> action;

    SimulateOpts sim;
    auto* s = app.add_subcommand("simulate", "Simulate states and observations");
    add_model(s, sim);
    s->add_option("--theta", sim.theta, "Parameter vector (comma separated)");
    s->add_option("--T", sim.T, "Number of time steps")->check(CLI::PositiveNumber)->capture_default_str();
    add_seed(s, sim);
    s->add_option("--out", sim.out, "Output CSV")->required();
    s->callback([&] { action = [&] { cmd_simulate(sim, out); }; });

    PfOpts pf;
    s = app.add_subcommand("pf-loglik", "Particle-filter log-likelihood estimate(s)");
    add_model(s, pf);
    s->add_option("--theta", pf.theta, "Parameter vector")->required();
    s->add_option("--data", pf.data, "Observation CSV")->required();
    add_particles(s, pf);
    add_seed(s, pf);
    s->add_option("--reps", pf.reps, "Independent replicates (seeds seed..seed+reps-1)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s->add_option("--threads", pf.threads, "Worker threads for replicates (0 = all cores)");
    s->add_option("--out", pf.out, "Output CSV (default: standard output)");
    s->callback([&] { action = [&] { cmd_pf_loglik(pf, out); }; });

    KalmanOpts kg;
    s = app.add_subcommand("kalman-grid", "Exact LGSS likelihood maximized on a grid");
    s->add_option("--data", kg.data, "Observation CSV")->required();
    s->add_option("--grid", kg.grid, "Grid points over [-1, 1]")->check(CLI::Range(3, 1000000))->capture_default_str();
    s->callback([&] { action = [&] { cmd_kalman_grid(kg, out); }; });

    GpoOpts go;
    s = app.add_subcommand("gpo", "Gaussian-process optimisation of the PF log-likelihood");
    add_model(s, go);
    s->add_option("--data", go.data, "Observation CSV")->required();
    s->add_option("--theta1", go.theta1, "Initial iterate (default: -0.98 for lgss, 0.5,0.5 for hullwhite)");
    s->add_option("--iters", go.iters, "Iterations K (default: 50 for lgss, 300 for hullwhite)")
        ->check(CLI::PositiveNumber);
    add_particles(s, go);
    s->add_option("--zeta", go.zeta, "Exploration margin")->check(CLI::NonNegativeNumber)->capture_default_str();
    s->add_option("--inner-evals", go.inner_evals, "DIRECT budget for the acquisition")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s->add_option("--surface-at", go.surface_at, "Iterations whose posterior is dumped to surface_<k>.csv")
        ->delimiter(',');
    s->add_option("--grid", go.grid, "Grid points per axis for surface dumps")->capture_default_str();
    add_seed(s, go);
    s->add_option("--out-dir", go.out, "Output directory")->required();
    s->callback([&] { action = [&] { cmd_gpo(go, out); }; });

    SpsaOpts sp;
    s = app.add_subcommand("spsa", "SPSA ascent on the PF log-likelihood");
    add_model(s, sp);
    s->add_option("--data", sp.data, "Observation CSV")->required();
    s->add_option("--theta0", sp.theta0, "Initial iterate");
    s->add_option("--iters", sp.iters, "Iterations (two likelihood estimates each)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    add_particles(s, sp);
    s->add_option("--a", sp.a, "Gain numerator")->capture_default_str();
    s->add_option("--c", sp.c, "Perturbation size")->capture_default_str();
    s->add_option("--alpha", sp.alpha, "Gain decay exponent")->capture_default_str();
    s->add_option("--gamma", sp.gamma, "Perturbation decay exponent")->capture_default_str();
    s->add_option("--A", sp.A, "Stability constant (default: 10% of iterations)");
    add_seed(s, sp);
    s->add_option("--out", sp.out, "Trace CSV")->required();
    s->callback([&] { action = [&] { cmd_spsa(sp, out); }; });

    DirectOpts dt;
    s = app.add_subcommand("direct-test", "Run DIRECT on a built-in test function");
    std::vector<std::string> fn_names;
    for (const auto& f : direct_test_functions()) fn_names.push_back(f.name);
    s->add_option("--fn", dt.fn, "Test function")->required()->check(CLI::IsMember(fn_names));
    s->add_option("--max-evals", dt.max_evals, "Evaluation budget")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--epsilon", dt.epsilon, "Potential-optimality slack")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    s->callback([&] { action = [&] { cmd_direct_test(dt, out); }; });

    DumpOpts gd;
    for (const bool ei : {false, true}) {
        s = app.add_subcommand(ei ? "ei-dump" : "gp-dump",
                               ei ? "Expected improvement on a grid" : "GP posterior mean and sd on a grid");
        add_model(s, gd);
        s->add_option("--iterates", gd.iterates, "CSV with theta1..thetad and loglik_hat columns")->required();
        s->add_option("--grid", gd.grid, "Grid points per axis")->capture_default_str();
        s->add_option("--zeta", gd.zeta, "Exploration margin")->check(CLI::NonNegativeNumber)->capture_default_str();
        s->add_flag("!--no-fit", gd.fit_hyper, "Keep default hyperparameters instead of empirical Bayes");
        s->add_option("--out", gd.out, "Output CSV")->required();
        s->callback([&, ei] { action = [&, ei] { cmd_gp_dump(gd, ei); }; });
    }

    StudyOpts st;
    s = app.add_subcommand("replicate-study", "Distribution of repeated PF log-likelihood estimates");
    add_model(s, st);
    s->add_option("--theta", st.theta, "Parameter vector");
    s->add_option("--data", st.data, "Observation CSV")->required();
    add_particles(s, st);
    s->add_option("--reps", st.reps, "Replicates")->capture_default_str();
    s->add_option("--threads", st.threads, "Worker threads (0 = all cores)");
    s->add_option("--null-reps", st.null_reps, "Simulations for the normality-test null distribution")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_seed(s, st);
    s->add_option("--out-dir", st.out, "Output directory")->required();
    s->callback([&] { action = [&] { cmd_replicate_study(st, out); }; });

    std::vector<const char*> argv;
    argv.push_back(args.empty() ? "pfgpo" : args.front().c_str());
    for (std::size_t i = 1; i < args.size(); ++i) argv.push_back(args[i].c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        action();
    } catch (const IoError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kRuntime;
    } catch (const std::invalid_argument& e) {
        // DomainError and other precondition violations on user-supplied values
        fmt::print(err, "error: {}\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kRuntime;
    }
    return kOk;
}

}  // namespace pfgpo::cli
