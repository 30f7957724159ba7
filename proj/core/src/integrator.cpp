#include "bkl/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bkl/ode.hpp"

namespace bkl {

void IntegratorParams::validate(double t_start) const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw DomainError("integrator." + field + ": " + why);
    };
    if (!(rel_tol > 0.0) || !std::isfinite(rel_tol)) fail("rel_tol", "must be positive");
    if (!(abs_tol > 0.0) || !std::isfinite(abs_tol)) fail("abs_tol", "must be positive");
    if (!std::isfinite(t_end) || !(t_end > t_start)) fail("t_end", "must be finite and greater than t_start");
    if (max_steps == 0) fail("max_steps", "must be at least 1");
    if (!(drift_abort_ratio > 0.0)) fail("drift_abort_ratio", "must be positive");
    if (!(dense_sample_dt > 0.0) || !std::isfinite(dense_sample_dt)) fail("dense_sample_dt", "must be positive");
    if (!is_log_type(chart)) fail("chart", "integration requires a log-type chart (log, diag or ratio)");
    if (!(exponent_guard > 0.0)) fail("exponent_guard", "must be positive");
    if (!(constraint_tolerance > 0.0)) fail("constraint_tolerance", "must be positive");
}

std::string_view termination_name(TerminationReason r) {
    switch (r) {
        case TerminationReason::reached_t_end:
            return "reached_t_end";
        case TerminationReason::max_steps:
            return "max_steps";
        case TerminationReason::drift_abort:
            return "drift_abort";
        case TerminationReason::overflow:
            return "overflow";
        case TerminationReason::step_underflow:
            return "step_underflow";
    }
    return "unknown";
}

double TrajectoryPoint::drift() const {
    return energy.kinetic > 0.0 ? std::abs(energy.total) / energy.kinetic : std::numeric_limits<double>::infinity();
}

namespace {

TrajectoryPoint make_point(double t, const Vec3& u, const Vec3& du, double guard) {
    TrajectoryPoint p;
    p.t = t;
    p.u = u;
    p.du = du;
    p.ddu = rhs_u(DiagChart{u}, guard).acceleration;
    p.energy = constraint_residual(p.point(), guard);
    return p;
}

double quintic(double p0, double d0, double dd0, double p1, double d1, double dd1, double h, double th) {
    const double t2 = th * th;
    const double t3 = t2 * th;
    const double t4 = t3 * th;
    const double t5 = t4 * th;
    const double h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    const double h1 = th - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    const double h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    const double g0 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    const double g1 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    const double g2 = 0.5 * (t3 - 2.0 * t4 + t5);
    return h0 * p0 + h * h1 * d0 + h * h * h2 * dd0 + g0 * p1 + h * g1 * d1 + h * h * g2 * dd1;
}

Vec3 jerk(const TrajectoryPoint& p, double guard) {
    const std::array<Vec3, 3> J = rhs_u_jacobian(DiagChart{p.u}, guard);
    Vec3 out{};
    for (int i = 0; i < 3; ++i) out[i] = J[i][0] * p.du[0] + J[i][1] * p.du[1] + J[i][2] * p.du[2];
    return out;
}

TrajectoryPoint hermite_between(const TrajectoryPoint& a, const TrajectoryPoint& b, double t, double guard) {
    const double h = b.t - a.t;
    const double th = (t - a.t) / h;
    const Vec3 ja = jerk(a, guard);
    const Vec3 jb = jerk(b, guard);
    Vec3 u{};
    Vec3 du{};
    for (int i = 0; i < 3; ++i) {
        u[i] = quintic(a.u[i], a.du[i], a.ddu[i], b.u[i], b.du[i], b.ddu[i], h, th);
        du[i] = quintic(a.du[i], a.ddu[i], ja[i], b.du[i], b.ddu[i], jb[i], h, th);
    }
    return make_point(t, u, du, guard);
}

template <Chart C>
ode::State<6> pack(const PhasePoint<C>& p) {
    return {p.position[0], p.position[1], p.position[2], p.velocity[0], p.velocity[1], p.velocity[2]};
}

}  // namespace

TrajectoryPoint Trajectory::interpolate(double t, double guard) const {
    if (steps_.empty() || t < steps_.front().t || t > steps_.back().t) {
        throw DomainError("interpolate: t outside the trajectory range");
    }
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double v, const TrajectoryPoint& p) { return v < p.t; });
    if (it == steps_.end()) return steps_.back();
    if (it == steps_.begin()) return steps_.front();
    return hermite_between(*(it - 1), *it, t, guard);
}

Trajectory Trajectory::from_points(std::vector<TrajectoryPoint> points, double dense_sample_dt) {
    if (points.empty()) throw DomainError("from_points: no points");
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i].t > points[i - 1].t)) throw DomainError("from_points: times must increase strictly");
    }
    Trajectory traj;
    traj.steps_ = points;
    traj.samples_ = std::move(points);
    traj.dense_sample_dt_ = dense_sample_dt;
    for (const auto& p : traj.samples_) {
        traj.max_step_drift_ = std::max(traj.max_step_drift_, p.drift());
    }
    traj.max_sample_drift_ = traj.max_step_drift_;
    return traj;
}

double complete_velocity(const DiagChart& u, double du2, double du3, double guard) {
    if (!std::isfinite(du2) || !std::isfinite(du3)) throw DomainError("complete_velocity: non-finite velocity");
    const Vec3 e = exponentials(u, guard);
    const double radicand = (du2 * du2 + 3.0 * du3 * du3 + e[0] + e[1] + e[2]) / 3.0;
    if (!std::isfinite(radicand)) throw OverflowError("complete_velocity: radicand overflow");
    return -std::sqrt(radicand);
}

DiagPoint constrained_point(double t, const DiagChart& u, double du2, double du3) {
    return DiagPoint{t, u, Velocity<Chart::diag>{{complete_velocity(u, du2, du3), du2, du3}}};
}

namespace {

template <Chart C>
void run(const PhasePoint<C>& ic, const IntegratorParams& params, std::vector<TrajectoryPoint>& steps,
         std::vector<TrajectoryPoint>& samples, TerminationReason& reason, std::string& detail,
         double& max_step_drift, double& max_sample_drift, std::size_t& rejected, double& accumulated) {
    constexpr RationalMatrix3 to_u = linear_map<C, Chart::diag>();
    const double guard = params.exponent_guard;

    auto rhs = [guard](double, const ode::State<6>& y, ode::State<6>& f) {
        const RhsResult r = bkl::rhs(Position<C>{{y[0], y[1], y[2]}}, guard);
        f = {y[3], y[4], y[5], r.acceleration[0], r.acceleration[1], r.acceleration[2]};
    };
    ode::StepControl control;
    control.rel_tol = params.rel_tol;
    control.abs_tol = params.abs_tol;
    ode::DormandPrince45<6, decltype(rhs)> stepper(rhs, control);

    auto record = [&](double t, const ode::State<6>& y, const ode::State<6>& f) {
        TrajectoryPoint p;
        p.t = t;
        p.u = to_u.apply({y[0], y[1], y[2]});
        p.du = to_u.apply({y[3], y[4], y[5]});
        p.ddu = to_u.apply({f[3], f[4], f[5]});
        p.energy = constraint_residual(
            PhasePoint<C>{t, Position<C>{{y[0], y[1], y[2]}}, Velocity<C>{{y[3], y[4], y[5]}}}, guard);
        return p;
    };

    const double t0 = ic.t;
    const double dt = params.dense_sample_dt;
    stepper.initialize(t0, pack(ic), params.t_end);
    steps.push_back(record(t0, stepper.y(), stepper.dydt()));
    samples.push_back(steps.back());
    max_step_drift = steps.back().drift();
    max_sample_drift = max_step_drift;
    std::size_t next_k = 1;

    reason = TerminationReason::reached_t_end;
    while (stepper.t() < params.t_end) {
        if (steps.size() > params.max_steps) {
            reason = TerminationReason::max_steps;
            detail = "max_steps = " + std::to_string(params.max_steps) + " reached at t = " +
                     bkl::detail::short_number(stepper.t());
            break;
        }
        try {
            const ode::Step<6> step = stepper.step(params.t_end);
            rejected += static_cast<std::size_t>(step.rejected);
            accumulated += step.error_norm;
            steps.push_back(record(step.t1, step.y1, step.f1));
            const TrajectoryPoint& prev = steps[steps.size() - 2];
            const TrajectoryPoint& curr = steps.back();
            for (;;) {
                const double ts = t0 + static_cast<double>(next_k) * dt;
                if (ts > curr.t) break;
                samples.push_back(ts == curr.t ? curr : hermite_between(prev, curr, ts, guard));
                max_sample_drift = std::max(max_sample_drift, samples.back().drift());
                ++next_k;
            }
            const double drift = curr.drift();
            max_step_drift = std::max(max_step_drift, drift);
            if (!(std::abs(curr.energy.total) <= params.drift_abort_ratio * curr.energy.kinetic)) {
                reason = TerminationReason::drift_abort;
                detail = "|H|/E_k = " + bkl::detail::short_number(drift) + " at t = " + bkl::detail::short_number(curr.t);
                break;
            }
        } catch (const OverflowError& e) {
            reason = TerminationReason::overflow;
            detail = e.what();
            break;
        } catch (const ode::StepSizeUnderflow& e) {
            reason = TerminationReason::step_underflow;
            detail = e.what();
            break;
        }
    }
    if (reason == TerminationReason::reached_t_end && samples.back().t < steps.back().t) {
        samples.push_back(steps.back());
        max_sample_drift = std::max(max_sample_drift, samples.back().drift());
    }
}

}  // namespace

Trajectory integrate(const AnyPhasePoint& ic, const IntegratorParams& params) {
    const double t_start = std::visit([](const auto& p) { return p.t; }, ic);
    params.validate(t_start);

    const AnyPhasePoint native = convert(ic, params.chart);
    const EnergySplit energy = std::visit(
        [&](const auto& p) { return constraint_residual(p, params.exponent_guard); }, native);
    if (!(energy.kinetic > 0.0) || !(std::abs(energy.total) <= params.constraint_tolerance * energy.kinetic)) {
        throw IllPosedInitialCondition("initial condition violates the constraint: H = " +
                                       bkl::detail::short_number(energy.total) + ", E_k = " + bkl::detail::short_number(energy.kinetic));
    }
    const DiagPoint diag = std::get<DiagPoint>(convert(ic, Chart::diag));
    if (diag.velocity[0] == 0.0) {
        throw IllPosedInitialCondition("initial condition has u1' = 0");
    }

    Trajectory traj;
    traj.chart_ = params.chart;
    traj.dense_sample_dt_ = params.dense_sample_dt;
    std::visit(
        [&](const auto& p) {
            constexpr Chart C = std::decay_t<decltype(p)>::chart;
            if constexpr (is_log_type(C)) {
                run(p, params, traj.steps_, traj.samples_, traj.termination_, traj.termination_detail_,
                    traj.max_step_drift_, traj.max_sample_drift_, traj.rejected_steps_, traj.accumulated_error_);
            }
        },
        native);
    return traj;
}

std::vector<ReflectionEvent> detect_reflections(const Trajectory& traj, const ReflectionOptions& opts) {
    std::vector<ReflectionEvent> events;
    const auto& s = traj.samples();
    const std::size_t n = s.size();
    if (n < 3) return events;

    auto ek = [&](std::size_t i) { return s[i].energy.kinetic; };
    auto rate = [&](double t) {
        const TrajectoryPoint p = traj.interpolate(t);
        return kinetic_energy_rate(p.du, p.ddu);
    };
    const double dt = traj.dense_sample_dt() > 0.0 ? traj.dense_sample_dt() : (s.back().t - s.front().t) / double(n);

    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double e = ek(i);
        if (!(e < ek(i - 1) && e < ek(i + 1))) continue;

        double left_peak = e;
        for (std::size_t j = i; j-- > 0;) {
            if (ek(j) < e) break;
            left_peak = std::max(left_peak, ek(j));
        }
        double right_peak = e;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (ek(j) < e) break;
            right_peak = std::max(right_peak, ek(j));
        }
        const double peak = std::min(left_peak, right_peak);
        if (!(e > 0.0) || !(peak >= opts.prominence_factor * e)) continue;

        double lo = s[i - 1].t;
        double hi = s[i + 1].t;
        const double mid_rate = rate(s[i].t);
        if (mid_rate < 0.0) {
            lo = s[i].t;
        } else if (mid_rate > 0.0) {
            hi = s[i].t;
        } else {
            lo = hi = s[i].t;
        }
        double rate_lo = rate(lo);
        double rate_hi = rate(hi);
        if (rate_lo < 0.0 && rate_hi > 0.0) {
            const double accuracy = opts.time_accuracy * dt;
            while (hi - lo > accuracy) {
                const double m = 0.5 * (lo + hi);
                const double r = rate(m);
                if (r < 0.0) {
                    lo = m;
                    rate_lo = r;
                } else {
                    hi = m;
                    rate_hi = r;
                }
            }
        }
        ReflectionEvent ev;
        ev.n = events.size() + 1;
        ev.t = 0.5 * (lo + hi);
        ev.epsilon = traj.interpolate(ev.t).energy.kinetic;
        ev.rate_before = rate_lo;
        ev.rate_after = rate_hi;
        ev.prominence_decades = std::log10(peak / e);
        events.push_back(ev);
    }
    return events;
}

bool StepAudit::monotone() const {
    return min_combination_slack[0] >= 0.0 && min_combination_slack[1] >= 0.0 && min_combination_slack[2] >= 0.0 &&
           min_ddu1 > 0.0;
}

StepAudit audit_steps(const Trajectory& traj) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double sqrt3 = std::sqrt(3.0);
    StepAudit a;
    a.min_kinetic = inf;
    a.max_du1 = -inf;
    a.min_combination_slack = {inf, inf, inf};
    a.min_ddu1 = inf;
    a.min_stop_measure = inf;
    const auto& steps = traj.steps();
    a.steps = steps.size();
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const TrajectoryPoint& p = steps[k];
        a.min_kinetic = std::min(a.min_kinetic, p.energy.kinetic);
        a.max_du1 = std::max(a.max_du1, p.du[0]);
        a.min_ddu1 = std::min(a.min_ddu1, p.ddu[0]);
        a.max_du2_ratio = std::max(a.max_du2_ratio, std::abs(p.du[1]) / (sqrt3 * std::abs(p.du[0])));
        a.max_du3_ratio = std::max(a.max_du3_ratio, std::abs(p.du[2]) / std::abs(p.du[0]));
        a.min_stop_measure = std::min(a.min_stop_measure, (9.0 * p.ddu[0] - 2.0 * p.ddu[1]) / p.energy.kinetic);
        a.max_identity_relative = std::max(a.max_identity_relative, acceleration_identity(p.point()).relative());
        a.max_drift = std::max(a.max_drift, p.drift());
        if (k > 0) {
            const Vec3 c0 = monotone_velocity_combinations(steps[k - 1].du);
            const Vec3 c1 = monotone_velocity_combinations(p.du);
            // Each combination is rebuilt from three rounded velocities, so a
            // few ulps of the term sizes is below resolution.
            const double size = 4.0 * std::abs(p.du[0]) + std::abs(p.du[1]) + std::abs(p.du[2]);
            for (int i = 0; i < 3; ++i) {
                const double allowance = 8.0 * eps * size;
                a.min_combination_slack[i] = std::min(a.min_combination_slack[i], c1[i] - c0[i] + allowance);
            }
        }
    }
    return a;
}

}  // namespace bkl
