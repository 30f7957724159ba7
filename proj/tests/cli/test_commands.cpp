#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bkl/config.hpp"
#include "commands.hpp"

using namespace bkl;
using namespace bkl::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        out.push_back(cells);
    }
    return out;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("bkl_cli_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(ExactCommand, TauOneRow) {
    ExactRequest req;
    req.from = 1.0;
    req.to = 10.0;
    req.samples = 10;
    const auto r = rows(exact_csv(req));
    ASSERT_EQ(r.size(), 11u);
    EXPECT_EQ(r[0][0], "t");
    EXPECT_EQ(r[0][1], "a");
    EXPECT_EQ(r[1][0], "1");
    EXPECT_EQ(r[1][1], "3");
    EXPECT_EQ(r[1][2], "30");
    EXPECT_EQ(r[1][3], "120");
    EXPECT_EQ(r[10][0], "10");
}

TEST(ExactCommand, U3ColumnIsConstant) {
    ExactRequest req;
    req.from = 0.5;
    req.to = 50.0;
    req.samples = 25;
    req.chart = Chart::diag;
    const auto r = rows(exact_csv(req));
    ASSERT_EQ(r[0][3], "u3");
    for (std::size_t k = 1; k < r.size(); ++k) EXPECT_NEAR(std::stod(r[k][3]), std::log(2.5) / 6.0, 1e-15);
}

TEST(ExactCommand, RangeReachingT0IsAnError) {
    ExactRequest req;
    req.t0 = 2.0;
    req.from = 1.0;
    req.to = 3.0;
    EXPECT_THROW(exact_csv(req), DomainError);
    req.from = 2.0;
    EXPECT_THROW(exact_csv(req), DomainError);
    std::ostringstream out, log;
    EXPECT_EQ(cmd_exact(req, std::nullopt, out, log), kExitUsage);
    EXPECT_TRUE(out.str().empty());
    req.from = 0.0;
    req.to = 1.0;
    req.samples = 1;
    EXPECT_THROW(exact_csv(req), DomainError);
}

TEST(SimulateCommand, ExactPresetHasNoEventsOrEpochs) {
    const fs::path dir = scratch("exact");
    std::ostringstream log;
    ASSERT_EQ(cmd_simulate(preset("exact"), dir, log), kExitOk) << log.str();
    EXPECT_TRUE(rows(slurp(dir / "events.csv")).size() == 1);
    EXPECT_TRUE(rows(slurp(dir / "epochs.csv")).size() == 1);
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(summary["schema_version"], 1);
    EXPECT_EQ(summary["termination"], "reached_t_end");
    EXPECT_EQ(summary["reflections"], 0);
    EXPECT_EQ(summary["limits"]["classification"], "apex-trending");
    EXPECT_LE(summary["drift"]["max"].get<double>(), 1e-8);
    fs::remove_all(dir);
}

TEST(SimulateCommand, DefaultPresetOutputs) {
    const fs::path dir = scratch("generic");
    std::ostringstream log;
    ASSERT_EQ(cmd_simulate(std::nullopt, std::nullopt, dir, log), kExitOk) << log.str();
    const std::string traj = slurp(dir / "trajectory.csv");
    EXPECT_EQ(traj.rfind("# bkl trajectory schema_version=1\n", 0), 0u);
    const auto t = rows(traj);
    EXPECT_GT(t.size(), 1001u);
    const std::vector<std::string> header{"t", "u1", "u2", "u3", "du1", "du2", "du3", "y1", "y2", "y3", "E_k", "E_p", "H"};
    EXPECT_EQ(t[0], header);
    for (std::size_t k = 1; k < t.size(); ++k) ASSERT_EQ(t[k].size(), header.size());
    EXPECT_EQ(traj.find('\r'), std::string::npos);

    const auto ev = rows(slurp(dir / "events.csv"));
    EXPECT_EQ(ev[0], (std::vector<std::string>{"n", "t_n", "eps_n"}));
    EXPECT_EQ(ev.size(), 7u);
    const auto ep = rows(slurp(dir / "epochs.csv"));
    EXPECT_EQ(ep[0], (std::vector<std::string>{"t_start", "t_end", "p1", "p2", "p3", "residual"}));
    EXPECT_GE(ep.size(), 2u);

    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(summary["completed"], true);
    EXPECT_EQ(summary["reflections"], 6);
    EXPECT_TRUE(summary["limits"].contains("gamma"));
    EXPECT_EQ(summary["apex"]["non_convergence_flag"], true);
    fs::remove_all(dir);
}

TEST(SimulateCommand, OutputIsDeterministic) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    std::ostringstream log;
    ASSERT_EQ(cmd_simulate(preset("generic-collapse"), a, log), kExitOk);
    ASSERT_EQ(cmd_simulate(preset("generic-collapse"), b, log), kExitOk);
    for (const char* f : {"trajectory.csv", "events.csv", "epochs.csv", "summary.json"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(SimulateCommand, PerturbationPresetWritesItsTable) {
    const fs::path dir = scratch("pert");
    std::ostringstream log;
    ASSERT_EQ(cmd_simulate(preset("perturbation"), dir, log), kExitOk) << log.str();
    const auto p = rows(slurp(dir / "perturbation.csv"));
    EXPECT_EQ(p.size(), 8193u);
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_NEAR(summary["perturbation"]["frequency_ratio"].get<double>(), 2.06, 0.05);
    fs::remove_all(dir);
}

TEST(SimulateCommand, ExitCodes) {
    std::ostringstream log;
    const fs::path cfg = scratch("bad.json");
    {
        std::ofstream out(cfg);
        out << R"({"schema_version": 1, "initial_condition": {"t": 5, "position": [0, 0, 0]},
                   "integrator": {"t_end": 1}})";
    }
    EXPECT_EQ(cmd_simulate(cfg, std::nullopt, scratch("bad_out"), log), kExitUsage);
    EXPECT_NE(log.str().find("integrator.t_end"), std::string::npos);
    fs::remove(cfg);

    RunConfig infeasible = preset("generic-collapse");
    infeasible.initial_condition.velocity = Vec3{-1.0, 0.0, 0.5};
    infeasible.initial_condition.position = {0, 0, 0};
    EXPECT_EQ(cmd_simulate(infeasible, scratch("infeasible"), log), kExitInfeasible);

    RunConfig abort = preset("generic-collapse");
    abort.integrator.rel_tol = 1e-6;
    abort.integrator.abs_tol = 1e-8;
    abort.integrator.drift_abort_ratio = 1e-6;
    const fs::path dir = scratch("abort");
    EXPECT_EQ(cmd_simulate(abort, dir, log), kExitAborted);
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(summary["completed"], false);
    EXPECT_EQ(summary["termination"], "drift_abort");
    EXPECT_TRUE(fs::exists(dir / "trajectory.csv"));
    fs::remove_all(dir);
}

TEST(VerifyCommand, SelectedChecksAndReport) {
    const fs::path report = scratch("verify.json");
    std::ostringstream out, log;
    EXPECT_EQ(cmd_verify({"exact-solution-residual", "instability"}, report, out, log), kExitOk) << out.str();
    const auto j = nlohmann::json::parse(slurp(report));
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_EQ(j["passed"], true);
    bool saw_ratio = false, saw_growth = false;
    for (const auto& c : j["checks"]) {
        for (const auto& m : c["measurements"]) {
            if (m["name"] == "frequency_ratio") saw_ratio = m.contains("tolerance");
            if (m["name"] == "relative_growth_exponent") saw_growth = m.contains("tolerance");
        }
    }
    EXPECT_TRUE(saw_ratio);
    EXPECT_TRUE(saw_growth);
    fs::remove(report);

    std::ostringstream out2, log2;
    EXPECT_EQ(cmd_verify({"no-such-check"}, std::nullopt, out2, log2), kExitCheckFailed);
    EXPECT_NE(log2.str().find("no-such-check"), std::string::npos);
}
