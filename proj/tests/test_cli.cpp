#include "cli.hpp"

#include "pfgpo/kalman_oracle.hpp"
#include "pfgpo/particle_filter.hpp"

#include <gtest/gtest.h>
#include <fmt/format.h>
#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace pfgpo;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "pfgpo");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / fmt_name();
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static std::string fmt_name() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        return std::string("pfgpo_cli_") + info->name();
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SimulateWritesHeaderAndRows) {
    const auto r = run({"simulate", "--model", "lgss", "--theta", "0.5", "--T", "250", "--seed", "7", "--out",
                        path("d.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto l = lines(path("d.csv"));
    ASSERT_EQ(l.size(), 251u);
    EXPECT_EQ(l[0], "t,x,y");
}

TEST_F(CliTest, CsvValuesRoundTripBitwise) {
    ASSERT_EQ(run({"simulate", "--model", "hullwhite", "--T", "100", "--seed", "3", "--out", path("d.csv")}).code, 0);
    const auto d = simulate(hullwhite_model(), Eigen::Vector2d(0.9, 0.2), 100, 3);
    const auto l = lines(path("d.csv"));
    for (std::size_t t = 0; t < 100; ++t) {
        std::stringstream ss(l[t + 1]);
        std::string idx, x, y;
        std::getline(ss, idx, ',');
        std::getline(ss, x, ',');
        std::getline(ss, y, ',');
        const double xv = std::strtod(x.c_str(), nullptr), yv = std::strtod(y.c_str(), nullptr);
        EXPECT_EQ(std::memcmp(&xv, &d.states[t], sizeof(double)), 0);
        EXPECT_EQ(std::memcmp(&yv, &d.observations.y[t], sizeof(double)), 0);
    }
}

TEST_F(CliTest, PfLoglikOutsideDomainIsUsageError) {
    ASSERT_EQ(run({"simulate", "--T", "20", "--seed", "1", "--out", path("d.csv")}).code, 0);
    const auto r = run({"pf-loglik", "--model", "lgss", "--theta", "2.0", "--data", path("d.csv"), "--seed", "1"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("outside domain"), std::string::npos) << r.err;
}

TEST_F(CliTest, PfLoglikMatchesLibrary) {
    ASSERT_EQ(run({"simulate", "--T", "30", "--seed", "1", "--out", path("d.csv")}).code, 0);
    const auto r = run({"pf-loglik", "--theta", "0.3", "--data", path("d.csv"), "--particles", "200", "--seed", "9",
                        "--reps", "4", "--out", path("pf.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto l = lines(path("pf.csv"));
    ASSERT_EQ(l.size(), 5u);
    EXPECT_EQ(l[0], "rep,seed,loglik,degenerate");
    const auto d = simulate(lgss_model(), ParamVector::Constant(1, 0.5), 30, 1);
    const double expected = estimate_loglik(lgss_model(), ParamVector::Constant(1, 0.3), d.observations, 200, 11).value;
    EXPECT_EQ(l[3], fmt::format("2,11,{:.17g},0", expected));
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"simulate", "--out", path("x.csv")}).code, 1);  // seed is required
    EXPECT_EQ(run({"simulate", "--seed", "1", "--bogus", "--out", path("x.csv")}).code, 1);
    EXPECT_EQ(run({"simulate", "--model", "nope", "--seed", "1", "--out", path("x.csv")}).code, 1);
    EXPECT_EQ(run({"simulate", "--theta", "0.5,0.1", "--seed", "1", "--out", path("x.csv")}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, RuntimeErrors) {
    EXPECT_EQ(run({"kalman-grid", "--data", path("missing.csv")}).code, 2);
    std::ofstream(path("bad.csv")) << "t,x,y\n1,2,abc\n";
    EXPECT_EQ(run({"kalman-grid", "--data", path("bad.csv")}).code, 2);
}

TEST_F(CliTest, KalmanGridPrintsMle) {
    ASSERT_EQ(run({"simulate", "--T", "250", "--seed", "5", "--out", path("d.csv")}).code, 0);
    const auto r = run({"kalman-grid", "--data", path("d.csv")});
    ASSERT_EQ(r.code, 0);
    const auto g = grid_mle(simulate(lgss_model(), ParamVector::Constant(1, 0.5), 250, 5).observations);
    EXPECT_EQ(r.out, fmt::format("theta_mle,loglik\n{:.17g},{:.17g}\n", g.theta, g.value));
}

TEST_F(CliTest, GpoEmitsTraceSummaryAndSurfaces) {
    ASSERT_EQ(run({"simulate", "--model", "lgss", "--theta", "0.5", "--T", "250", "--seed", "7", "--out",
                   path("d.csv")})
                  .code,
              0);
    const auto r = run({"gpo", "--model", "lgss", "--data", path("d.csv"), "--theta1", "-0.98", "--iters", "50",
                        "--particles", "1000", "--seed", "1", "--out-dir", path("r"), "--surface-at", "5,10,15,50",
                        "--grid", "11"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto l = lines(path("r/iterates.csv"));
    ASSERT_EQ(l.size(), 51u);
    EXPECT_EQ(l[0], "k,theta1,loglik_hat,mu_max,ei_max,degenerate");
    EXPECT_EQ(l[1].rfind("1,-0.97999999999999998,", 0), 0u) << l[1];
    for (int k : {5, 10, 15, 50}) EXPECT_EQ(lines(path(fmt::format("r/surface_{}.csv", k))).size(), 12u);
    const auto j = nlohmann::json::parse(slurp(path("r/result.json")));
    EXPECT_EQ(j["loglik_evaluations"], 50);
    EXPECT_EQ(j["theta_hat"].size(), 1u);
    EXPECT_TRUE(j["hyperparameters"].contains("noise_var"));

    ASSERT_EQ(run({"gp-dump", "--iterates", path("r/iterates.csv"), "--grid", "7", "--out", path("gp.csv")}).code, 0);
    EXPECT_EQ(lines(path("gp.csv")).size(), 8u);
    EXPECT_EQ(lines(path("gp.csv"))[0], "theta1,mu,sigma");
    ASSERT_EQ(run({"ei-dump", "--iterates", path("r/iterates.csv"), "--grid", "7", "--out", path("ei.csv")}).code, 0);
    EXPECT_EQ(lines(path("ei.csv"))[0], "theta1,ei");
}

TEST_F(CliTest, SpsaTrace) {
    ASSERT_EQ(run({"simulate", "--model", "hullwhite", "--T", "50", "--seed", "2", "--out", path("d.csv")}).code, 0);
    const auto r = run({"spsa", "--model", "hullwhite", "--data", path("d.csv"), "--theta0", "0.5,0.5", "--iters",
                        "10", "--particles", "100", "--seed", "4", "--out", path("s.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto l = lines(path("s.csv"));
    ASSERT_EQ(l.size(), 12u);
    EXPECT_EQ(l[0], "iter,theta1,theta2,evals");
    EXPECT_EQ(l[11].substr(l[11].rfind(',') + 1), "20");
}

TEST_F(CliTest, DirectTest) {
    const auto r = run({"direct-test", "--fn", "quadratic1d", "--max-evals", "200"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("theta1,value,n_evals\n", 0), 0u);
    EXPECT_EQ(run({"direct-test", "--fn", "nope"}).code, 1);
}

TEST_F(CliTest, ReplicateStudyMinimal) {
    ASSERT_EQ(run({"simulate", "--T", "50", "--seed", "1", "--out", path("d.csv")}).code, 0);
    const auto r = run({"replicate-study", "--data", path("d.csv"), "--reps", "20", "--particles", "200", "--seed",
                        "1", "--null-reps", "500", "--out-dir", path("rs")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(slurp(path("rs/summary.json")));
    for (const char* key : {"mean", "std", "skewness", "kurtosis", "bias", "kalman_loglik"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_TRUE(j["normality"].contains("p_value"));
    EXPECT_TRUE(j["normality"].contains("statistic"));
    EXPECT_EQ(lines(path("rs/replicates.csv")).size(), 21u);
    EXPECT_EQ(lines(path("rs/qq.csv")).size(), 21u);
    EXPECT_EQ(run({"replicate-study", "--data", path("d.csv"), "--reps", "19", "--seed", "1", "--out-dir",
                   path("rs2")})
                  .code,
              1);
}

TEST_F(CliTest, RerunIsByteIdentical) {
    ASSERT_EQ(run({"simulate", "--T", "40", "--seed", "1", "--out", path("a.csv")}).code, 0);
    ASSERT_EQ(run({"simulate", "--T", "40", "--seed", "1", "--out", path("b.csv")}).code, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}
