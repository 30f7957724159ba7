#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bkl/config.hpp"
#include "bkl/state_charts.hpp"
#include "bkl/verify.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"BKL equations simulator and analysis toolkit"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Integrate a configured run and write CSV/JSON outputs");
    std::string config_path, preset_name, out_dir;
    auto* config_opt = sim->add_option("--config", config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
    auto* preset_opt = sim->add_option("--preset", preset_name, "Shipped preset: exact, generic-collapse, perturbation");
    config_opt->excludes(preset_opt);
    sim->add_option("--out", out_dir, "Output directory")->required();

    auto* ver = app.add_subcommand("verify", "Run the acceptance criteria and invariant checks");
    std::string json_path;
    std::vector<std::string> check_ids;
    bool list = false;
    ver->add_option("--json", json_path, "Write the machine-readable report here");
    ver->add_option("--check", check_ids, "Run only these check ids");
    ver->add_flag("--list", list, "List check ids and exit");

    auto* ex = app.add_subcommand("exact", "Sample the exact solution on a time range");
    bkl::cli::ExactRequest req;
    std::string chart_tag = "scale-factors", exact_out;
    ex->add_option("--t0", req.t0, "Singular time of the solution")->capture_default_str();
    ex->add_option("--from", req.from, "First sample time")->required();
    ex->add_option("--to", req.to, "Last sample time")->required();
    ex->add_option("--samples", req.samples, "Number of samples, endpoints included")->capture_default_str();
    ex->add_option("--chart", chart_tag, "scale-factors|log|diag|ratio (or abc|x|u|y)")->capture_default_str();
    ex->add_option("--output", exact_out, "Write the CSV here instead of stdout");

    auto* pre = app.add_subcommand("preset", "Print a shipped preset configuration as JSON");
    std::string dump_name;
    pre->add_option("name", dump_name, "Preset name; omit to list the names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : bkl::cli::kExitUsage;
    }

    if (*sim) {
        std::optional<std::filesystem::path> cfg;
        std::optional<std::string> pre;
        if (*config_opt) cfg = config_path;
        if (*preset_opt) pre = preset_name;
        if (!cfg && !pre) {
            std::cerr << "simulate: one of --config or --preset is required\n";
            return bkl::cli::kExitUsage;
        }
        return bkl::cli::cmd_simulate(cfg, pre, out_dir, std::cerr);
    }
    if (*ver) {
        if (list) {
            for (const auto& c : bkl::verify::list_checks()) {
                std::cout << c.id << (c.acceptance ? " [acceptance] " : " ") << c.title << '\n';
            }
            return bkl::cli::kExitOk;
        }
        std::optional<std::filesystem::path> jp;
        if (!json_path.empty()) jp = json_path;
        return bkl::cli::cmd_verify(check_ids, jp, std::cout, std::cerr);
    }
    if (*pre) {
        if (dump_name.empty()) {
            for (auto n : bkl::preset_names()) std::cout << n << '\n';
            return bkl::cli::kExitOk;
        }
        try {
            std::cout << bkl::to_json(bkl::preset(dump_name)) << '\n';
        } catch (const bkl::ConfigError& e) {
            std::cerr << e.what() << '\n';
            return bkl::cli::kExitUsage;
        }
        return bkl::cli::kExitOk;
    }
    const auto chart = bkl::parse_chart(chart_tag);
    if (!chart) {
        std::cerr << "exact: unknown chart '" << chart_tag << "'\n";
        return bkl::cli::kExitUsage;
    }
    req.chart = *chart;
    std::optional<std::filesystem::path> eo;
    if (!exact_out.empty()) eo = exact_out;
    return bkl::cli::cmd_exact(req, eo, std::cout, std::cerr);
}
