#pragma once

// Long-horizon integration of the constrained BKL dynamics.
//
// The first integral H is monitored at every accepted step and never
// projected out; drift is reported, and aborts the run only when it exceeds
// drift_abort_ratio * E_k.

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "bkl/dynamics.hpp"
#include "bkl/state_charts.hpp"

namespace bkl {

struct IntegratorParams {
    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    double t_end = 100.0;
    std::size_t max_steps = 2'000'000;
    double drift_abort_ratio = 1e-3;
    Chart chart = Chart::diag;
    double dense_sample_dt = 0.01;
    double exponent_guard = kDefaultExponentGuard;
    /// Admissible |H| / E_k of the initial condition.
    double constraint_tolerance = 1e-10;

    /// Throws DomainError naming the offending field.
    void validate(double t_start) const;
};

enum class TerminationReason { reached_t_end, max_steps, drift_abort, overflow, step_underflow };

std::string_view termination_name(TerminationReason r);

/// One stored state, always expressed in the diag chart.
struct TrajectoryPoint {
    double t = 0.0;
    Vec3 u{};
    Vec3 du{};
    Vec3 ddu{};
    EnergySplit energy;

    DiagPoint point() const { return DiagPoint{t, DiagChart{u}, Velocity<Chart::diag>{du}}; }
    /// |H| / E_k
    double drift() const;
};

class Trajectory {
public:
    /// Accepted steps, starting with the initial condition.
    const std::vector<TrajectoryPoint>& steps() const { return steps_; }
    /// Uniformly spaced dense samples (plus t_end when it is off the grid).
    const std::vector<TrajectoryPoint>& samples() const { return samples_; }

    TerminationReason termination() const { return termination_; }
    const std::string& termination_detail() const { return termination_detail_; }
    bool completed() const { return termination_ == TerminationReason::reached_t_end; }
    Chart chart() const { return chart_; }
    double dense_sample_dt() const { return dense_sample_dt_; }
    double t_start() const { return steps_.front().t; }
    double t_end() const { return steps_.back().t; }

    double max_step_drift() const { return max_step_drift_; }
    double max_sample_drift() const { return max_sample_drift_; }
    double max_drift() const { return std::max(max_step_drift_, max_sample_drift_); }
    std::size_t rejected_steps() const { return rejected_steps_; }
    /// Sum over accepted steps of the embedded error estimate, in units of the
    /// per-component tolerance scale.
    double accumulated_error() const { return accumulated_error_; }

    /// State at t by quintic Hermite interpolation of the bracketing step
    /// (positions from u, u', u''; velocities from u', u'', u'''); accelerations
    /// are re-evaluated from the interpolated position.
    TrajectoryPoint interpolate(double t, double guard = kDefaultExponentGuard) const;

    /// Builds a trajectory from precomputed points (for analysis of closed-form
    /// or externally produced data). Steps double as samples.
    static Trajectory from_points(std::vector<TrajectoryPoint> points, double dense_sample_dt);

private:
    friend Trajectory integrate(const AnyPhasePoint& ic, const IntegratorParams& params);

    std::vector<TrajectoryPoint> steps_;
    std::vector<TrajectoryPoint> samples_;
    TerminationReason termination_ = TerminationReason::reached_t_end;
    std::string termination_detail_;
    Chart chart_ = Chart::diag;
    double dense_sample_dt_ = 0.0;
    double max_step_drift_ = 0.0;
    double max_sample_drift_ = 0.0;
    std::size_t rejected_steps_ = 0;
    double accumulated_error_ = 0.0;
};

/// Solves H = 0 for u1' on the collapsing branch:
///   u1' = -sqrt((u2'^2 + 3 u3'^2 + q + r + s) / 3).
double complete_velocity(const DiagChart& u, double du2, double du3, double guard = kDefaultExponentGuard);

/// Constrained collapsing phase point at time t.
DiagPoint constrained_point(double t, const DiagChart& u, double du2, double du3);

/// Integrates from `ic` (any chart) to params.t_end in params.chart.
/// Throws IllPosedInitialCondition if |H| > constraint_tolerance * E_k or the
/// initial u1' vanishes; run-time failures end the trajectory and are
/// recorded as its termination reason.
Trajectory integrate(const AnyPhasePoint& ic, const IntegratorParams& params);

struct ReflectionEvent {
    std::size_t n = 0;       ///< 1-based reflection index
    double t = 0.0;          ///< refined time of the kinetic-energy minimum
    double epsilon = 0.0;    ///< E_k(t), the hyperboloid label
    double rate_before = 0.0;  ///< dE_k/dt at the left end of the final bracket
    double rate_after = 0.0;   ///< dE_k/dt at the right end of the final bracket
    double prominence_decades = 0.0;
};

struct ReflectionOptions {
    /// Required drop of E_k below the neighbouring peaks on both sides.
    double prominence_factor = 10.0;
    /// Bisection stops when the bracket is shorter than this times the
    /// dense sample spacing.
    double time_accuracy = 1e-6;
};

/// Strict local minima of E_k over the dense samples, filtered by prominence
/// and refined by bisection on the sign change of dE_k/dt.
std::vector<ReflectionEvent> detect_reflections(const Trajectory& traj, const ReflectionOptions& opts = {});

/// Worst-case values of the per-step invariants of a collapsing run.
struct StepAudit {
    std::size_t steps = 0;
    double min_kinetic = 0.0;
    double max_du1 = 0.0;                   ///< must stay < 0
    /// min over steps of (increment + rounding allowance) for u1',
    /// 4u1'-u2'-u3' and 2u1'-u2'+u3'; negative means a genuine decrease.
    Vec3 min_combination_slack{};
    double min_ddu1 = 0.0;                  ///< must stay > 0
    double max_du2_ratio = 0.0;             ///< |u2'| / (sqrt3 |u1'|)
    double max_du3_ratio = 0.0;             ///< |u3'| / |u1'|
    double min_stop_measure = 0.0;          ///< min (9u1'' - 2u2'') / E_k
    double max_identity_relative = 0.0;     ///< acceleration identity residual / term scale
    double max_drift = 0.0;

    bool cone_confined() const { return min_kinetic > 0.0 && max_du1 < 0.0; }
    bool monotone() const;
    bool velocity_bounded() const { return max_du2_ratio <= 1.0 && max_du3_ratio <= 1.0; }
    bool no_interior_stop() const { return min_stop_measure > 0.0; }
};

StepAudit audit_steps(const Trajectory& traj);

}  // namespace bkl
