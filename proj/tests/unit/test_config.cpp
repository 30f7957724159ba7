#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "bkl/config.hpp"
#include "bkl/errors.hpp"

using namespace bkl;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string field_of(const std::string& json) {
    try {
        parse_config(json);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<accepted>";
}

const char* kMinimal = R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0]}})";

}  // namespace

TEST(Config, MinimalConfigUsesDefaults) {
    const RunConfig c = parse_config(kMinimal);
    EXPECT_EQ(c.initial_condition.chart, Chart::diag);
    EXPECT_FALSE(c.initial_condition.velocity.has_value());
    EXPECT_EQ(c.integrator, IntegratorParams{});
    EXPECT_EQ(c.analysis, AnalysisSwitches{});
}

TEST(Config, PresetsRoundTrip) {
    for (auto name : preset_names()) {
        const RunConfig c = preset(name);
        EXPECT_EQ(c.name, name);
        EXPECT_EQ(parse_config(to_json(c)), c) << name;
    }
    EXPECT_THROW(preset("nope"), ConfigError);
}

TEST(Config, ShippedPresetFilesMatchTheBuiltIns) {
    for (auto name : preset_names()) {
        const std::string path = std::string(BKL_PRESET_DIR) + "/" + std::string(name) + ".json";
        const std::string text = slurp(path);
        ASSERT_FALSE(text.empty()) << path;
        EXPECT_EQ(load_config(path), preset(name)) << path;
        EXPECT_EQ(text, to_json(preset(name)) + "\n") << path;
    }
}

TEST(Config, ErrorsNameTheField) {
    EXPECT_EQ(field_of("{"), "<root>");
    EXPECT_EQ(field_of(R"({"initial_condition": {"position": [0, 0, 0]}})"), "schema_version");
    EXPECT_EQ(field_of(R"({"schema_version": 1})"), "initial_condition");
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"position": [0, 0]}})"),
              "initial_condition.position");
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0], "chart": "polar"}})"),
              "initial_condition.chart");
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0], "t": 5},
                           "integrator": {"t_end": 1}})"),
              "integrator.t_end");
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0]},
                           "integrator": {"rel_tol": "small"}})"),
              "integrator.rel_tol");
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0]},
                           "integrator": {"rel_tol": -1}})"),
              "integrator.rel_tol");
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0]},
                           "integrator": {"tolerance": 1}})"),
              "integrator.tolerance");
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0]}, "extra": 1})"),
              "extra");
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0]},
                           "analysis": {"epoch_delta": 0}})"),
              "analysis.epoch_delta");
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0]},
                           "analysis": {"reflections": false}})"),
              "analysis.epochs");
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0]},
                           "perturbation": {"seed": [1, 2, 3]}})"),
              "perturbation.seed");
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0],
                           "velocity": [-1, 0, 0], "du2": 1}})"),
              "initial_condition.velocity");
}

TEST(Config, InitialConditionCompletesTheVelocity) {
    const RunConfig c = parse_config(
        R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0], "du2": 1, "du3": 0}})");
    const DiagPoint p = std::get<DiagPoint>(initial_condition(c));
    EXPECT_NEAR(p.velocity[0], -2.0 / std::sqrt(3.0), 1e-15);
    EXPECT_EQ(p.velocity[1], 1.0);
}

TEST(Config, InfeasibleExplicitVelocity) {
    const RunConfig c = parse_config(
        R"({"schema_version": 1, "initial_condition": {"position": [0, 0, 0], "velocity": [-1, 0, 0.5]}})");
    EXPECT_THROW(initial_condition(c), IllPosedInitialCondition);
}

TEST(Config, ScaleFactorChartInitialCondition) {
    const RunConfig c = parse_config(R"({"schema_version": 1, "initial_condition":
        {"chart": "scale-factors", "t": 1, "position": [3, 30, 120], "velocity": [-3, -90, -600]}})");
    const AnyPhasePoint p = initial_condition(c);
    EXPECT_EQ(chart_of(p), Chart::scale_factors);
    EXPECT_EQ(field_of(R"({"schema_version": 1, "initial_condition": {"chart": "abc", "position": [1, 0, 1]}})"),
              "initial_condition.position");
}
