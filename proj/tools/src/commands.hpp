#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bkl/config.hpp"
#include "bkl/epoch_analysis.hpp"
#include "bkl/exact_solution.hpp"
#include "bkl/integrator.hpp"

namespace bkl::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitUsage = 2,  ///< config or argument error
    kExitInfeasible = 3,
    kExitAborted = 4,
};

std::string trajectory_csv(const Trajectory& traj);
std::string events_csv(const std::vector<ReflectionEvent>& events);
std::string epochs_csv(const std::vector<EpochRecord>& epochs);
std::string perturbation_csv(const PerturbationRun& run);

int cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);
/// Loads the config (or a named preset) first; config errors give kExitUsage.
int cmd_simulate(const std::optional<std::filesystem::path>& config_path, const std::optional<std::string>& preset,
                 const std::filesystem::path& out_dir, std::ostream& log);

struct ExactRequest {
    double t0 = 0.0;
    double from = 1.0;
    double to = 10.0;
    std::size_t samples = 101;
    Chart chart = Chart::scale_factors;
};

/// Throws DomainError when the range reaches t0 or samples < 2.
std::string exact_csv(const ExactRequest& req);
int cmd_exact(const ExactRequest& req, const std::optional<std::filesystem::path>& output, std::ostream& out,
              std::ostream& log);

int cmd_verify(const std::vector<std::string>& ids, const std::optional<std::filesystem::path>& json_path,
               std::ostream& out, std::ostream& log);

}  // namespace bkl::cli
