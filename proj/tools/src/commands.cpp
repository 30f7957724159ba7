#include "commands.hpp"

#include <cmath>
#include <exception>
#include <ostream>
#include <variant>

#include <json.hpp>

#include "bkl/dynamics.hpp"
#include "bkl/errors.hpp"
#include "bkl/verify.hpp"
#include "output.hpp"

namespace bkl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string trajectory_csv(const Trajectory& traj) {
    CsvWriter w("trajectory", {"t", "u1", "u2", "u3", "du1", "du2", "du3", "y1", "y2", "y3", "E_k", "E_p", "H"});
    for (const TrajectoryPoint& p : traj.samples()) {
        const Vec3 y = maps::diag_to_ratio.apply(p.u);
        w.row({p.t, p.u[0], p.u[1], p.u[2], p.du[0], p.du[1], p.du[2], y[0], y[1], y[2], p.energy.kinetic,
               p.energy.potential, p.energy.total});
    }
    return w.text();
}

std::string events_csv(const std::vector<ReflectionEvent>& events) {
    CsvWriter w("events", {"n", "t_n", "eps_n"});
    for (const ReflectionEvent& e : events) w.row({static_cast<double>(e.n), e.t, e.epsilon});
    return w.text();
}

std::string epochs_csv(const std::vector<EpochRecord>& epochs) {
    CsvWriter w("epochs", {"t_start", "t_end", "p1", "p2", "p3", "residual"});
    for (const EpochRecord& e : epochs) w.row({e.t_start, e.t_end, e.p[0], e.p[1], e.p[2], e.kasner_quadratic_residual});
    return w.text();
}

std::string perturbation_csv(const PerturbationRun& run) {
    CsvWriter w("perturbation", {"s", "t", "d_u1", "d_u2", "d_u3", "d_du1", "d_du2", "d_du3", "osc_y1", "osc_y2",
                                 "osc_y3"});
    for (std::size_t k = 0; k < run.s.size(); ++k) {
        const Vec6& d = run.deviation[k];
        const Vec3& o = run.oscillatory[k];
        w.row({run.s[k], run.t[k], d[0], d[1], d[2], d[3], d[4], d[5], o[0], o[1], o[2]});
    }
    return w.text();
}

namespace {

json trend_json(const TailTrend& tr) {
    return {{"mean", tr.mean},
            {"slope", tr.slope},
            {"window_magnitudes", tr.window_magnitudes},
            {"magnitude_decreasing", tr.magnitude_decreasing},
            {"negligible", tr.negligible}};
}

json limits_json(const LimitReport& r) {
    json du = json::array(), dy = json::array();
    for (int i = 0; i < 3; ++i) {
        du.push_back(trend_json(r.du[i]));
        dy.push_back(trend_json(r.dy[i]));
    }
    return {{"tail_samples", r.tail_samples},
            {"tail_start", r.tail_start},
            {"tail_end", r.tail_end},
            {"g", r.g()},
            {"gamma", r.gamma()},
            {"du", du},
            {"dy", dy},
            {"combinations_increasing", r.combinations_increasing},
            {"cone_bounds_hold", r.cone_bounds_hold()},
            {"apex_trending", r.apex_trending},
            {"classification", std::string(r.classification())}};
}

json apex_json(const ApexReport& a) {
    return {{"tail_samples", a.tail_samples},
            {"y2_minus_y1", a.y2_minus_y1},
            {"y3_minus_y1", a.y3_minus_y1},
            {"inverse_rate_slope", a.inverse_rate_slope},
            {"distance", a.distance},
            {"max_distance", a.max_distance()},
            {"du2_over_du1", a.du2_over_du1},
            {"du3_over_du1", a.du3_over_du1},
            {"ddy2_over_ddy1", a.ddy2_over_ddy1},
            {"ddy3_over_ddy1", a.ddy3_over_ddy1},
            {"ratio_spread2", a.ratio_spread2},
            {"ratio_spread3", a.ratio_spread3},
            {"non_convergence_flag", a.non_convergence_flag()}};
}

json perturbation_json(const PerturbationRun& r) {
    return {{"seed_norm", r.seed_norm},
            {"samples", r.s.size()},
            {"max_relative_deviation", r.max_relative_deviation},
            {"omega1", r.omega1},
            {"omega2", r.omega2},
            {"frequency_ratio", r.frequency_ratio},
            {"relative_growth_exponent", r.relative_growth_exponent},
            {"absolute_growth_exponent", r.absolute_growth_exponent},
            {"periods_covered", r.periods_covered}};
}

void emit(const fs::path& dir, const char* name, const std::string& text, json& files) {
    write_atomic(dir / name, text);
    files.push_back(name);
}

}  // namespace

int cmd_simulate(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
    Trajectory traj;
    try {
        traj = integrate(initial_condition(config), config.integrator);
    } catch (const IllPosedInitialCondition& e) {
        log << "infeasible initial condition: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const DomainError& e) {
        log << "infeasible initial condition: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const OverflowError& e) {
        log << "infeasible initial condition: " << e.what() << '\n';
        return kExitInfeasible;
    }

    const AnalysisSwitches& an = config.analysis;
    json summary;
    summary["schema_version"] = kOutputSchemaVersion;
    summary["name"] = config.name;
    summary["completed"] = traj.completed();
    summary["termination"] = std::string(termination_name(traj.termination()));
    if (!traj.termination_detail().empty()) summary["termination_detail"] = traj.termination_detail();
    summary["t_start"] = traj.t_start();
    summary["t_end"] = traj.t_end();
    summary["steps"] = traj.steps().size();
    summary["rejected_steps"] = traj.rejected_steps();
    summary["samples"] = traj.samples().size();
    summary["drift"] = {{"max", traj.max_drift()},
                        {"max_step", traj.max_step_drift()},
                        {"max_sample", traj.max_sample_drift()}};
    summary["accumulated_error_tolerance_units"] = traj.accumulated_error();
    json errors = json::object();

    std::vector<ReflectionEvent> events;
    std::vector<EpochRecord> epochs;
    if (an.reflections || an.epochs) {
        ReflectionOptions opts;
        opts.prominence_factor = an.prominence_factor;
        events = detect_reflections(traj, opts);
    }
    if (an.reflections) summary["reflections"] = events.size();
    if (an.epochs) {
        epochs = epoch_segments(traj, events, an.epoch_delta);
        summary["epochs"] = epochs.size();
    }
    if (an.limits) {
        try {
            summary["limits"] = limits_json(limit_estimates(traj, an.tail_fraction, an.tail_windows));
        } catch (const Error& e) {
            errors["limits"] = e.what();
        }
        try {
            ApexOptions opts;
            opts.tail_fraction = an.tail_fraction;
            opts.windows = an.tail_windows;
            summary["apex"] = apex_json(apex_asymptotics(traj, opts));
        } catch (const Error& e) {
            errors["apex"] = e.what();
        }
    }
    std::optional<PerturbationRun> pert;
    if (an.perturbation) {
        try {
            pert = perturbation_run(config.perturbation.seed, config.perturbation.horizon,
                                    config.perturbation.params());
            summary["perturbation"] = perturbation_json(*pert);
        } catch (const Error& e) {
            errors["perturbation"] = e.what();
        }
    }
    if (!errors.empty()) {
        summary["analysis_errors"] = errors;
        for (const auto& [k, v] : errors.items()) log << "warning: " << k << ": " << v.get<std::string>() << '\n';
    }

    json files = json::array();
    try {
        fs::create_directories(out_dir);
        if (config.output.csv) {
            emit(out_dir, "trajectory.csv", trajectory_csv(traj), files);
            if (an.reflections) emit(out_dir, "events.csv", events_csv(events), files);
            if (an.epochs) emit(out_dir, "epochs.csv", epochs_csv(epochs), files);
            if (pert) emit(out_dir, "perturbation.csv", perturbation_csv(*pert), files);
        }
        if (config.output.json) {
            files.push_back("summary.json");
            summary["files"] = files;
            write_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
        }
    } catch (const std::exception& e) {
        log << "output error: " << e.what() << '\n';
        return kExitUsage;
    }

    if (!traj.completed()) {
        log << "integration aborted (" << termination_name(traj.termination()) << ") at t = "
            << format_double(traj.t_end()) << ": " << traj.termination_detail() << '\n';
        return kExitAborted;
    }
    log << config.name << ": t = [" << format_double(traj.t_start()) << ", " << format_double(traj.t_end())
        << "], " << traj.samples().size() << " samples, max drift " << format_double(traj.max_drift()) << '\n';
    return kExitOk;
}

int cmd_simulate(const std::optional<fs::path>& config_path, const std::optional<std::string>& preset_name,
                 const fs::path& out_dir, std::ostream& log) {
    RunConfig config;
    try {
        config = config_path ? load_config(*config_path) : preset(preset_name.value_or("generic-collapse"));
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitUsage;
    }
    return cmd_simulate(config, out_dir, log);
}

namespace {

std::array<std::string, 6> chart_columns(Chart c) {
    switch (c) {
        case Chart::scale_factors: return {"a", "b", "c", "da", "db", "dc"};
        case Chart::log: return {"x1", "x2", "x3", "dx1", "dx2", "dx3"};
        case Chart::diag: return {"u1", "u2", "u3", "du1", "du2", "du3"};
        case Chart::ratio: break;
    }
    return {"y1", "y2", "y3", "dy1", "dy2", "dy3"};
}

}  // namespace

std::string exact_csv(const ExactRequest& req) {
    if (req.samples < 2) throw DomainError("--samples must be at least 2");
    if (!std::isfinite(req.from) || !std::isfinite(req.to) || !std::isfinite(req.t0)) {
        throw DomainError("range and t0 must be finite");
    }
    if (!((req.from - req.t0) * (req.to - req.t0) > 0.0)) {
        throw DomainError("range [" + format_double(req.from) + ", " + format_double(req.to) + "] reaches t0 = " +
                          format_double(req.t0));
    }
    ExactParams params;
    params.t0 = req.t0;
    params.branch = req.from > req.t0 ? +1 : -1;

    std::vector<std::string> cols{"t"};
    for (auto& c : chart_columns(req.chart)) cols.push_back(c);
    for (const char* c : {"E_k", "E_p", "H"}) cols.emplace_back(c);
    CsvWriter w("exact chart=" + std::string(chart_name(req.chart)), cols);

    const double n = static_cast<double>(req.samples - 1);
    for (std::size_t k = 0; k < req.samples; ++k) {
        const double t = k + 1 == req.samples ? req.to : req.from + (req.to - req.from) * (static_cast<double>(k) / n);
        const AnyPhasePoint p = exact_state(t, req.chart, params);
        std::visit(
            [&](const auto& q) {
                const EnergySplit e = constraint_residual(q);
                w.row({t, q.position[0], q.position[1], q.position[2], q.velocity[0], q.velocity[1], q.velocity[2],
                       e.kinetic, e.potential, e.total});
            },
            p);
    }
    return w.text();
}

int cmd_exact(const ExactRequest& req, const std::optional<fs::path>& output, std::ostream& out, std::ostream& log) {
    std::string text;
    try {
        text = exact_csv(req);
    } catch (const Error& e) {
        log << "exact: " << e.what() << '\n';
        return kExitUsage;
    }
    if (output) {
        try {
            write_atomic(*output, text);
        } catch (const std::exception& e) {
            log << "output error: " << e.what() << '\n';
            return kExitUsage;
        }
    } else {
        out << text;
    }
    return kExitOk;
}

int cmd_verify(const std::vector<std::string>& ids, const std::optional<fs::path>& json_path, std::ostream& out,
               std::ostream& log) {
    std::vector<verify::CheckResult> results;
    if (ids.empty()) {
        results = verify::run_all();
    } else {
        for (const std::string& id : ids) results.push_back(verify::run_check(id));
    }
    std::vector<std::string> failed;
    for (const auto& r : results) {
        out << verify::summary_line(r) << '\n';
        if (!r.passed) failed.push_back(r.id);
    }
    if (json_path) {
        try {
            write_atomic(*json_path, verify::report_json(results));
        } catch (const std::exception& e) {
            log << "output error: " << e.what() << '\n';
            return kExitUsage;
        }
    }
    if (!failed.empty()) {
        log << failed.size() << " check(s) failed:";
        for (const auto& id : failed) log << ' ' << id;
        log << '\n';
        return kExitCheckFailed;
    }
    out << results.size() << " checks passed\n";
    return kExitOk;
}

}  // namespace bkl::cli
