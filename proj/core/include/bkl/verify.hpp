#pragma once

// Executable acceptance criteria and module invariants, shared by
// `bkl verify` and the acceptance test binary.

#include <string>
#include <vector>

namespace bkl::verify {

struct Measurement {
    std::string name;
    double value = 0.0;
    std::string relation;  ///< "<=", ">=", "==", "within", "true"
    double target = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct CheckResult {
    std::string id;
    std::string title;
    bool acceptance = false;
    bool passed = false;
    std::string detail;  ///< error text when the check threw
    double seconds = 0.0;
    std::vector<Measurement> measurements;
};

struct CheckInfo {
    std::string id;
    std::string title;
    bool acceptance = false;
};

std::vector<CheckInfo> list_checks();

/// Runs the named check; unknown ids yield a failed result.
CheckResult run_check(const std::string& id);

std::vector<CheckResult> run_acceptance();
/// Acceptance criteria followed by the module invariant checks.
std::vector<CheckResult> run_all();

/// One line per check: "PASS <id>: <title> [measurements]".
std::string summary_line(const CheckResult& r);
/// Machine-readable report with schema_version.
std::string report_json(const std::vector<CheckResult>& results);

}  // namespace bkl::verify
