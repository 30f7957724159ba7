#pragma once

// Run configuration (JSON) and the shipped presets.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bkl/epoch_analysis.hpp"
#include "bkl/exact_solution.hpp"
#include "bkl/integrator.hpp"

namespace bkl {

inline constexpr int kConfigSchemaVersion = 1;

/// Malformed or out-of-range configuration; field() is the dotted path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct InitialConditionSpec {
    Chart chart = Chart::diag;
    double t = 0.0;
    Vec3 position{};
    /// Full velocity in `chart`. When absent, u2' and u3' below are used and
    /// u1' is completed on the collapsing branch.
    std::optional<Vec3> velocity;
    double du2 = 0.0;
    double du3 = 0.0;

    bool operator==(const InitialConditionSpec&) const = default;
};

struct AnalysisSwitches {
    bool reflections = true;
    bool epochs = true;
    bool limits = true;
    bool perturbation = false;
    double epoch_delta = kDefaultEpochDelta;
    double tail_fraction = 0.5;
    std::size_t tail_windows = kDefaultTailWindows;
    double prominence_factor = 10.0;

    bool operator==(const AnalysisSwitches&) const = default;
};

struct PerturbationSpec {
    Vec6 seed{};
    double horizon = 66.0;
    double tau_start = 1.0;
    double rel_tol = 1e-11;
    double linearity_cap = 1e-3;
    std::size_t samples = 8192;

    bool operator==(const PerturbationSpec&) const = default;
    PerturbationParams params() const;
};

struct OutputSpec {
    bool csv = true;
    bool json = true;

    bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
    std::string name;
    InitialConditionSpec initial_condition;
    IntegratorParams integrator;
    AnalysisSwitches analysis;
    PerturbationSpec perturbation;
    OutputSpec output;
};

bool operator==(const IntegratorParams& a, const IntegratorParams& b);
bool operator==(const RunConfig& a, const RunConfig& b);

/// Parses and validates; unknown keys are rejected. Throws ConfigError.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& config);

/// Constrained initial phase point. Throws IllPosedInitialCondition if an
/// explicit velocity violates the constraint, OverflowError/DomainError on
/// invalid positions.
AnyPhasePoint initial_condition(const RunConfig& config);

std::vector<std::string_view> preset_names();
/// Throws ConfigError for unknown names.
RunConfig preset(std::string_view name);

}  // namespace bkl
