#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "mbvp/cli.hpp"
#include "mbvp/errors.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = mbvp::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("mbvp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string& name, const json& doc) {
        const auto path = dir_ / name;
        std::ofstream(path) << doc.dump(2);
        return path;
    }

    static std::string read(const fs::path& path) {
        std::ifstream in(path);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    static std::vector<std::string> lines(const std::string& text) {
        std::vector<std::string> out;
        std::istringstream in(text);
        for (std::string line; std::getline(in, line);) out.push_back(line);
        return out;
    }

    json trivial() const {
        return {{"T", 1},
                {"n", 1},
                {"m", 1},
                {"N", 100},
                {"f1", "-x1"},
                {"f2", "-y1"},
                {"gamma", {{"kind", "dirichlet"}}},
                {"eta", {{"kind", "dirichlet"}}},
                {"output", (dir_ / "out").string()}};
    }

    json coupled_example() const {
        json doc = trivial();
        doc["N"] = 200;
        doc["f1"] = "(2-1)*x1 + (1/(1+normx^2))*(normy^2*x1 + cos(6.283185307179586*t))";
        doc["f2"] = "(1/(1+normy^2))*(normx^2*y1 + sin(6.283185307179586*t)) + (2-1)*y1";
        doc["eta"] = {{"kind", "antiperiodic"}};
        return doc;
    }

    fs::path dir_;
};

}  // namespace

TEST(FormatReal, ShortestRoundTrip) {
    EXPECT_EQ(mbvp::format_real(0.1), "0.1");
    EXPECT_EQ(mbvp::format_real(1.0), "1");
    EXPECT_EQ(mbvp::format_real(-2.5e-20), "-2.5e-20");
    const double x = std::numbers::pi;
    EXPECT_EQ(std::stod(mbvp::format_real(x)), x);
}

TEST_F(CliTest, TrivialSolveWritesZeroRows) {
    const auto cfg = write_config("trivial.json", trivial());
    const auto r = run({"solve", cfg.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(read(dir_ / "out" / "solution.csv"));
    ASSERT_EQ(rows.size(), 102u);
    EXPECT_EQ(rows[0], "t,u1,v1,du1,dv1");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto comma = rows[i].find(',');
        EXPECT_EQ(rows[i].substr(comma), ",0,0,0,0") << rows[i];
    }
    const auto report = json::parse(read(dir_ / "out" / "report.json"));
    EXPECT_EQ(report["status"], "converged");
    EXPECT_EQ(report["bound_ok"], true);
}

TEST_F(CliTest, HeaderFollowsDimensions) {
    json doc = trivial();
    doc["n"] = 2;
    doc["m"] = 3;
    doc["f1"] = json::array({"-x1", "-x2"});
    doc["f2"] = json::array({"-y1", "-y2", "-y3 + 0.1*x2"});
    const auto cfg = write_config("dims.json", doc);
    ASSERT_EQ(run({"solve", cfg.string()}).code, 0);
    const auto rows = lines(read(dir_ / "out" / "solution.csv"));
    EXPECT_EQ(rows[0], "t,u1,u2,v1,v2,v3,du1,du2,dv1,dv2,dv3");
    EXPECT_EQ(rows.size(), 102u);
}

TEST_F(CliTest, MisspelledBoundaryKind) {
    json doc = trivial();
    doc["gamma"]["kind"] = "dirichet";
    const auto cfg = write_config("bad.json", doc);
    const auto r = run({"solve", cfg.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("gamma.kind"), std::string::npos) << r.err;
}

TEST_F(CliTest, ConfigErrorsNameTheKey) {
    const std::vector<std::pair<std::function<void(json&)>, std::string>> cases{
        {[](json& d) { d.erase("T"); }, "T"},
        {[](json& d) { d["N"] = 101; }, "N"},
        {[](json& d) { d["f1"] = "x2"; }, "f1"},
        {[](json& d) { d["f2"] = "-y1 +"; }, "f2"},
        {[](json& d) { d["solver"] = {{"tolerance", 1e-8}}; }, "solver.tolerance"},
        {[](json& d) { d["eta"] = {{"kind", "linear_psd"}, {"matrix", {{-1, 0}, {0, -1}}}}; }, "eta.matrix"},
        {[](json& d) { d["eta"] = {{"kind", "projection"}, {"set", "cube"}}; }, "eta.set"},
        {[](json& d) { d["sampling"] = {{"samples", 10}}; }, "sampling.samples"},
        {[](json& d) { d["extra"] = 1; }, "extra"},
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
        json doc = trivial();
        cases[i].first(doc);
        const auto cfg = write_config("case" + std::to_string(i) + ".json", doc);
        const auto r = run({"solve", cfg.string()});
        EXPECT_EQ(r.code, 2) << cases[i].second;
        EXPECT_NE(r.err.find(cases[i].second), std::string::npos) << r.err;
    }
    EXPECT_THROW(mbvp::parse_config("{\"T\": 1,"), mbvp::ConfigError);
    EXPECT_EQ(run({"solve", (dir_ / "missing.json").string()}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST_F(CliTest, CoupledExampleCertifiesCaseOne) {
    const auto cfg = write_config("coupled.json", coupled_example());
    const auto r = run({"solve", cfg.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = json::parse(read(dir_ / "out" / "report.json"));
    EXPECT_EQ(report["case"], "i");
    EXPECT_EQ(report["bound_ok"], true);
    EXPECT_LT(report["residuals"]["ode"].get<double>(), 1e-8);
    EXPECT_LT(report["residuals"]["bc"].get<double>(), 1e-8);
    EXPECT_NEAR(report["bound"].get<double>(), 2.0992, 1e-3);
    for (const auto key : {"residuals", "norms", "strategy", "iterations", "bound"}) {
        EXPECT_TRUE(report.contains(key)) << key;
    }
    const auto rows = lines(read(dir_ / "out" / "solution.csv"));
    ASSERT_EQ(rows.size(), 202u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::istringstream in(rows[i]);
        std::vector<double> cells;
        for (std::string cell; std::getline(in, cell, ',');) cells.push_back(std::stod(cell));
        ASSERT_EQ(cells.size(), 5u);
        EXPECT_LT(std::abs(cells[3]), 1.0);
        EXPECT_LT(std::abs(cells[4]), 1.0);
    }
}

TEST_F(CliTest, ReportsAreReproducibleAndSeedable) {
    json doc = coupled_example();
    doc["eta"] = {{"kind", "periodic"}};
    doc["gamma"] = {{"kind", "linear_psd"}, {"matrix", {{0, 1}, {-1, 0}}}};
    doc["f1"] = "(0.4-1)*x1 + (0.4/(1+normx^2))*(normy^2*x1 + cos(6.283185307179586*t))";
    doc["f2"] = "(0.4/(1+normy^2))*(normx^2*y1 + sin(6.283185307179586*t)) + (0.4-1)*y1";
    doc["growth"] = {{"f1", {{"a", 0.4}, {"b", 0.4}}}, {"f2", {{"c", 0.4}, {"d", 0.4}}}};
    doc["sampling"] = {{"samples", 2000}};
    const auto cfg = write_config("rot.json", doc);
    ASSERT_EQ(run({"solve", cfg.string()}).code, 0);
    const auto first = read(dir_ / "out" / "report.json");
    ASSERT_EQ(run({"solve", cfg.string()}).code, 0);
    EXPECT_EQ(read(dir_ / "out" / "report.json"), first);

    const auto report = json::parse(first);
    EXPECT_EQ(report["case"], "iv");
    EXPECT_EQ(report["bound_ok"], true);
    EXPECT_EQ(report["seed"], 24397);
    EXPECT_EQ(report["growth"][0]["label"], "sampled certificate");

    ::setenv("MBVP_SEED", "12345", 1);
    const auto seeded = run({"solve", cfg.string()});
    ::unsetenv("MBVP_SEED");
    ASSERT_EQ(seeded.code, 0);
    EXPECT_EQ(json::parse(read(dir_ / "out" / "report.json"))["seed"], 12345);

    ::setenv("MBVP_SEED", "not-a-seed", 1);
    EXPECT_EQ(run({"solve", cfg.string()}).code, 2);
    ::unsetenv("MBVP_SEED");
}

TEST_F(CliTest, CheckWritesOnlyTheCertificate) {
    const auto cfg = write_config("coupled.json", coupled_example());
    const auto r = run({"check", cfg.string(), "--out", (dir_ / "check").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir_ / "check" / "report.json"));
    EXPECT_FALSE(fs::exists(dir_ / "check" / "solution.csv"));
    const auto report = json::parse(read(dir_ / "check" / "report.json"));
    EXPECT_EQ(report["case"], "i");
    EXPECT_EQ(report["status"], "certified");
}

TEST_F(CliTest, NoConvergenceExitCode) {
    json doc = trivial();
    doc["N"] = 32;
    doc["f1"] = "1";
    doc["gamma"] = {{"kind", "neumann"}};
    doc["solver"] = {{"max_fp_iter", 20}, {"max_newton_iter", 5}, {"continuation_stages", 2}};
    const auto cfg = write_config("none.json", doc);
    const auto r = run({"solve", cfg.string()});
    EXPECT_EQ(r.code, 1);
    const auto report = json::parse(read(dir_ / "out" / "report.json"));
    EXPECT_EQ(report["status"], "no_convergence");
}

TEST_F(CliTest, Lambda1Subcommand) {
    auto r = run({"lambda1", "--bc", "dirichlet", "--T", "1", "--N", "400"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(r.out);
    EXPECT_NEAR(doc["lambda1"].get<double>(), std::numbers::pi * std::numbers::pi, 0.01 * 9.87);
    EXPECT_EQ(doc["method"], "eig_fd");
    r = run({"lambda1", "--bc", "periodic", "--T", "2", "--N", "100"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["lambda1"].get<double>(), 0.0);
    EXPECT_EQ(run({"lambda1", "--bc", "nope", "--T", "1", "--N", "100"}).code, 2);
    EXPECT_EQ(run({"lambda1", "--bc", "dirichlet", "--T", "1", "--N", "1"}).code, 2);
    EXPECT_EQ(run({"lambda1", "--bc", "dirichlet", "--T", "1"}).code, 2);
}

TEST_F(CliTest, MatrixSubcommand) {
    auto r = run({"matrix", "--entries", "0.3,0.4,0.4,0.3"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = json::parse(r.out);
    EXPECT_NEAR(doc["spectral_radius"].get<double>(), 0.7, 1e-12);
    EXPECT_EQ(doc["convergent"], true);
    EXPECT_NEAR(doc["inverse_I_minus_M"][0][1].get<double>(), 0.4 / 0.33, 1e-12);

    r = run({"matrix", "--entries", "0.4,0.4,0.4,0.4", "--delta", "1", "--T", "1"});
    ASSERT_EQ(r.code, 0);
    doc = json::parse(r.out);
    EXPECT_NEAR(doc["bound"]["beta_u"].get<double>(), 5.0, 1e-12);

    r = run({"matrix", "--entries", "0.6,0.5,0.5,0.6"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(json::parse(r.out)["convergent"], false);

    EXPECT_EQ(run({"matrix", "--entries", "0.1,-0.2,0,0"}).code, 2);
    EXPECT_EQ(run({"matrix", "--entries", "0.1,0.2,0"}).code, 2);
    EXPECT_EQ(run({"matrix", "--entries", "0.1,0.2,0,0", "--delta", "1"}).code, 2);
}

TEST_F(CliTest, StudyWritesErrorTable) {
    json doc = coupled_example();
    doc["study"] = {{"levels", {50, 100, 200}}, {"reference_N", 800}};
    const auto cfg = write_config("study.json", doc);
    const auto r = run({"study", cfg.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = lines(read(dir_ / "out" / "study.csv"));
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], "N,h,err_sup,err_h1,ratio_sup,ode_res,bc_res,strategy");
    std::istringstream last(rows[3]);
    std::vector<std::string> cells;
    for (std::string cell; std::getline(last, cell, ',');) cells.push_back(cell);
    const double ratio = std::stod(cells[4]);
    EXPECT_GT(ratio, 3.0);
    EXPECT_LT(ratio, 6.0);
}
