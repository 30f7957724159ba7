#pragma once

// The self-similar exact solution a = 3/|tau|, b = 30/|tau|^3, c = 120/|tau|^5
// (tau = t - t0), its linearisation, and the apex diagnostics it anchors.

#include <array>
#include <cstddef>
#include <vector>

#include "bkl/integrator.hpp"
#include "bkl/state_charts.hpp"

namespace bkl {

struct ExactParams {
    double t0 = 0.0;
    /// Sign of t - t0 on the branch being evaluated.
    int branch = +1;
};

/// Closed-form phase point at t in chart C. Throws DomainError if t == t0 or
/// t lies on the other branch.
template <Chart C>
PhasePoint<C> exact_state(double t, const ExactParams& params = {});

AnyPhasePoint exact_state(double t, Chart chart, const ExactParams& params = {});

/// Closed-form second derivatives of the chart coordinates (log-type charts),
/// e.g. (3, 2, 0)/tau^2 in the diag chart.
template <Chart C>
Vec3 exact_acceleration(double t, const ExactParams& params = {});

/// Exact trajectory sampled every dt on [t_from, t_to] (same branch).
Trajectory exact_trajectory(double t_from, double t_to, double dt, const ExactParams& params = {});

using Vec6 = std::array<double, 6>;
using Matrix6 = std::array<Vec6, 6>;

/// Jacobian of (u', u'') with respect to (u, u') along the exact solution.
Matrix6 variational_matrix(double t, const ExactParams& params = {});

Vec6 operator*(const Matrix6& m, const Vec6& v);

struct PerturbationParams {
    ExactParams exact;
    /// Integration starts at tau = tau_start; the horizon is measured in
    /// s = ln(tau / tau_start).
    double tau_start = 1.0;
    double rel_tol = 1e-11;
    double abs_tol = 1e-30;
    std::size_t samples = 8192;
    /// Bound on max |dx_i| (relative scale-factor deviation) over the run.
    double linearity_cap = 1e-3;
    double min_periods = 30.0;
    std::size_t max_steps = 5'000'000;
};

struct PerturbationRun {
    double seed_norm = 0.0;          ///< max-norm of the seed actually used
    std::vector<double> s;           ///< log-time grid ln(tau / tau_start)
    std::vector<double> t;
    std::vector<Vec6> deviation;     ///< (du, du') in the diag chart
    std::vector<Vec3> oscillatory;   ///< ratio-chart deviation with the secular mode removed
    double max_relative_deviation = 0.0;  ///< max |dx_i|

    // Filled by fit_perturbation.
    double omega1 = 0.0;  ///< slow angular frequency in log-time
    double omega2 = 0.0;
    double frequency_ratio = 0.0;
    double relative_growth_exponent = 0.0;  ///< |dx_osc| ~ tau^g
    double absolute_growth_exponent = 0.0;  ///< |(a dx1, b dx2, c dx3)_osc| ~ tau^g
    double periods_covered = 0.0;
};

/// Linearised first integral dH for a deviation at time t.
double linearized_constraint(const Vec6& deviation, double t, const ExactParams& params = {});

/// Integrates the variational system from tau_start over `horizon` units of
/// log-time. The seed is first made to satisfy dH = 0 and dH is held at zero
/// after every step. Throws LinearityCapExceeded.
PerturbationRun integrate_perturbation(const Vec6& seed, double horizon, const PerturbationParams& params = {});

/// Fits frequencies and growth exponents in place. Throws FitFailure.
void fit_perturbation(PerturbationRun& run, const PerturbationParams& params = {});

PerturbationRun perturbation_run(const Vec6& seed, double horizon, const PerturbationParams& params = {});

/// Oscillation frequencies of the linearised system in log-time, from its
/// characteristic polynomial: omega = sqrt(-mu - 1/4) for the negative
/// eigenvalues mu of M diag(9, 10, 4). Ascending.
std::array<double, 2> linearized_frequencies();

struct ApexOptions {
    double tail_fraction = 0.5;
    std::size_t windows = 3;
    /// Largest (max - min) of a direction ratio over the last tail window
    /// still counted as converged.
    double ratio_convergence_threshold = 1e-3;
};

struct ApexReport {
    std::size_t tail_samples = 0;
    double y2_minus_y1 = 0.0;
    double y3_minus_y1 = 0.0;
    double inverse_rate_slope = 0.0;  ///< d(1/y1')/dt
    Vec3 distance{};                  ///< from (ln 10/9, ln 4/9, -1/2)
    double du2_over_du1 = 0.0;
    double du3_over_du1 = 0.0;
    double ddy2_over_ddy1 = 0.0;
    double ddy3_over_ddy1 = 0.0;
    double ratio_spread2 = 0.0;  ///< max - min of y2''/y1'' over the last window
    double ratio_spread3 = 0.0;
    bool ratios_converge = false;

    double max_distance() const;
    bool non_convergence_flag() const { return !ratios_converge; }
};

/// Throws NotApexApproaching unless u1' < 0 throughout the tail and the
/// window means of |u1'| decrease strictly; InsufficientSamples below 100
/// tail samples.
ApexReport apex_asymptotics(const Trajectory& traj, const ApexOptions& opts = {});

}  // namespace bkl
