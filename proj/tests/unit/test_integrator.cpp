#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bkl/config.hpp"
#include "bkl/dynamics.hpp"
#include "bkl/errors.hpp"
#include "bkl/exact_solution.hpp"
#include "bkl/integrator.hpp"

using namespace bkl;

namespace {

double ek(const Vec3& du) { return 3 * du[0] * du[0] - du[1] * du[1] - 3 * du[2] * du[2]; }

IntegratorParams params(double t_end, double rel_tol = 1e-12) {
    IntegratorParams p;
    p.t_end = t_end;
    p.rel_tol = rel_tol;
    p.abs_tol = rel_tol * 1e-2;
    return p;
}

const Trajectory& origin_start_run() {
    static const Trajectory traj = integrate(constrained_point(0.0, DiagChart{{0, 0, 0}}, 1.0, 0.0), params(100.0));
    return traj;
}

const Trajectory& generic_run() {
    static const Trajectory traj = [] {
        const RunConfig cfg = preset("generic-collapse");
        return integrate(initial_condition(cfg), cfg.integrator);
    }();
    return traj;
}

}  // namespace

TEST(CompleteVelocity, Examples) {
    EXPECT_DOUBLE_EQ(complete_velocity(DiagChart{{0, 0, 0}}, 0.0, 0.0), -1.0);
    EXPECT_NEAR(complete_velocity(DiagChart{{0, 0, 0}}, 1.0, 0.0), -2.0 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(complete_velocity(exact_state<Chart::diag>(1.0).position, -2.0, 0.0), -3.0, 1e-14);
    const DiagPoint p = constrained_point(0.0, DiagChart{{0, 0, 0}}, 1.0, 0.0);
    EXPECT_NEAR(constraint_residual(p).total, 0.0, 1e-15);
}

TEST(IntegratorParams, Validation) {
    EXPECT_NO_THROW(params(10.0).validate(0.0));
    EXPECT_THROW(params(-1.0).validate(0.0), DomainError);
    EXPECT_THROW(params(0.0).validate(0.0), DomainError);
    IntegratorParams p = params(10.0);
    p.rel_tol = 0.0;
    EXPECT_THROW(p.validate(0.0), DomainError);
    p = params(10.0);
    p.drift_abort_ratio = -1.0;
    EXPECT_THROW(p.validate(0.0), DomainError);
    p = params(10.0);
    p.chart = Chart::scale_factors;
    EXPECT_THROW(p.validate(0.0), DomainError);
}

TEST(Integrate, RejectsIllPosedInitialCondition) {
    const DiagPoint bad{0.0, DiagChart{{0, 0, 0}}, Velocity<Chart::diag>{{-1.0, 0.0, 0.5}}};
    EXPECT_THROW(integrate(bad, params(10.0)), IllPosedInitialCondition);
}

TEST(Integrate, ExactSolutionOracle) {
    const Trajectory traj = integrate(exact_state<Chart::diag>(1.0), params(10.0, 1e-10));
    ASSERT_TRUE(traj.completed());
    const ScaleFactorPoint end = convert<Chart::scale_factors>(traj.steps().back().point());
    EXPECT_DOUBLE_EQ(traj.t_end(), 10.0);
    EXPECT_NEAR(end.position.a(), 0.3, 0.3 * 1e-6);
    EXPECT_NEAR(end.position.b(), 0.03, 0.03 * 1e-6);
    EXPECT_NEAR(end.position.c(), 1.2e-3, 1.2e-3 * 1e-6);
    EXPECT_LE(traj.max_drift(), 1e-8);
}

TEST(Integrate, DenseOutputTracksTheExactSolution) {
    const Trajectory traj = integrate(exact_state<Chart::diag>(1.0), params(20.0));
    for (double t : {1.005, 2.3456, 7.77, 13.001, 19.99}) {
        const TrajectoryPoint p = traj.interpolate(t);
        const DiagPoint e = exact_state<Chart::diag>(t);
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(p.u[i], e.position[i], 1e-8 * (1 + std::abs(e.position[i])));
            EXPECT_NEAR(p.du[i], e.velocity[i], 1e-8 * 3 / t);
        }
    }
}

TEST(Integrate, TrajectoryStructure) {
    const Trajectory& traj = origin_start_run();
    ASSERT_TRUE(traj.completed());
    const auto& s = traj.samples();
    ASSERT_GT(s.size(), 1000u);
    for (std::size_t k = 1; k < s.size(); ++k) ASSERT_LT(s[k - 1].t, s[k].t);
    for (std::size_t k = 1; k < traj.steps().size(); ++k) ASSERT_LT(traj.steps()[k - 1].t, traj.steps()[k].t);
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        EXPECT_NEAR(s[k].t, 0.01 * static_cast<double>(k), 1e-12);
        EXPECT_EQ(s[k].energy.total, s[k].energy.kinetic + s[k].energy.potential);
    }
    EXPECT_DOUBLE_EQ(s.back().t, 100.0);
}

TEST(Integrate, InvariantsAtEveryAcceptedStep) {
    for (const Trajectory* traj : {&generic_run(), &origin_start_run()}) {
        const StepAudit a = audit_steps(*traj);
        EXPECT_TRUE(a.cone_confined());
        EXPECT_TRUE(a.monotone());
        EXPECT_TRUE(a.velocity_bounded());
        EXPECT_TRUE(a.no_interior_stop());
        EXPECT_GT(a.min_ddu1, 0.0);
        EXPECT_LE(a.max_identity_relative, 1e-10);
    }
    // Independent re-check of the monotone combinations straight from the stored steps.
    const auto& st = generic_run().steps();
    for (std::size_t k = 1; k < st.size(); ++k) {
        const Vec3 c0 = monotone_velocity_combinations(st[k - 1].du);
        const Vec3 c1 = monotone_velocity_combinations(st[k].du);
        const double tol = 8 * std::numeric_limits<double>::epsilon() *
                           (4 * std::abs(st[k].du[0]) + std::abs(st[k].du[1]) + std::abs(st[k].du[2]));
        for (int i = 0; i < 3; ++i) ASSERT_GE(c1[i] - c0[i], -tol) << "step " << k;
        ASSERT_LT(st[k].du[0], 0.0);
        ASSERT_GT(ek(st[k].du), 0.0);
    }
}

TEST(Integrate, TimeReversalRoundTrip) {
    const RunConfig cfg = preset("generic-collapse");
    const AnyPhasePoint ic = initial_condition(cfg);
    const DiagPoint start = std::get<DiagPoint>(ic);
    IntegratorParams fwd = cfg.integrator;
    fwd.t_end = 20.0;
    const Trajectory out = integrate(ic, fwd);
    ASSERT_TRUE(out.completed());

    IntegratorParams back = fwd;
    back.t_end = 0.0;
    back.constraint_tolerance = std::max(1e-10, 10 * out.max_drift());
    const DiagPoint end = time_reverse(out.steps().back().point());
    back.t_end = -start.t;
    const Trajectory ret = integrate(end, back);
    ASSERT_TRUE(ret.completed());
    const DiagPoint home = time_reverse(ret.steps().back().point());
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(home.position[i], start.position[i], 1e-6 * std::max(1.0, std::abs(start.position[i])));
        EXPECT_NEAR(home.velocity[i], start.velocity[i], 1e-6 * std::max(1.0, std::abs(start.velocity[i])));
    }
}

TEST(Integrate, StopsAtMaxSteps) {
    IntegratorParams p = params(100.0);
    p.max_steps = 10;
    const Trajectory traj = integrate(exact_state<Chart::diag>(1.0), p);
    EXPECT_EQ(traj.termination(), TerminationReason::max_steps);
    EXPECT_FALSE(traj.completed());
    EXPECT_LT(traj.t_end(), 100.0);
    EXPECT_FALSE(traj.termination_detail().empty());
}

TEST(Integrate, AbortsOnDrift) {
    const RunConfig cfg = preset("generic-collapse");
    IntegratorParams p = cfg.integrator;
    p.rel_tol = 1e-6;
    p.abs_tol = 1e-8;
    p.drift_abort_ratio = 1e-6;
    const Trajectory traj = integrate(initial_condition(cfg), p);
    EXPECT_EQ(traj.termination(), TerminationReason::drift_abort);
    EXPECT_LT(traj.t_end(), p.t_end);
    EXPECT_GT(traj.samples().size(), 1u);
}

TEST(Integrate, RunsInEveryLogTypeChart) {
    const DiagPoint ic = exact_state<Chart::diag>(1.0);
    for (Chart c : {Chart::log, Chart::diag, Chart::ratio}) {
        IntegratorParams p = params(5.0);
        p.chart = c;
        const Trajectory traj = integrate(ic, p);
        ASSERT_TRUE(traj.completed()) << chart_name(c);
        const DiagPoint e = exact_state<Chart::diag>(5.0);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(traj.steps().back().u[i], e.position[i], 1e-8);
    }
}

TEST(Reflections, NoneOnTheExactSolution) {
    const Trajectory traj = integrate(exact_state<Chart::diag>(1.0), params(100.0));
    EXPECT_TRUE(detect_reflections(traj).empty());
    EXPECT_TRUE(detect_reflections(exact_trajectory(1.0, 100.0, 0.01)).empty());
}

TEST(Reflections, NoneWithFewerThanThreeSamples) {
    std::vector<TrajectoryPoint> pts;
    for (double t : {1.0, 1.01}) {
        const DiagPoint p = exact_state<Chart::diag>(t);
        TrajectoryPoint q;
        q.t = t;
        q.u = p.position.value;
        q.du = p.velocity.value;
        q.ddu = rhs_u(p.position).acceleration;
        q.energy = constraint_residual(p);
        pts.push_back(q);
    }
    EXPECT_TRUE(detect_reflections(Trajectory::from_points(pts, 0.01)).empty());
}

TEST(Reflections, MatchBruteForceFineGridScan) {
    for (const Trajectory* traj : {&origin_start_run(), &generic_run()}) {
        const auto events = detect_reflections(*traj);
        ASSERT_GE(events.size(), 1u);

        // Oracle: E_k on a grid at dt/100, strict minima at least a factor 10 below
        // the largest E_k between them and the neighbouring minima.
        const double h = traj->dense_sample_dt() / 100.0;
        std::vector<double> t, e;
        for (double s = traj->t_start(); s <= traj->t_end(); s += h) {
            t.push_back(s);
            e.push_back(ek(traj->interpolate(s).du));
        }
        std::vector<std::size_t> minima;
        for (std::size_t k = 1; k + 1 < e.size(); ++k) {
            if (e[k] < e[k - 1] && e[k] < e[k + 1]) minima.push_back(k);
        }
        std::vector<double> oracle;
        for (std::size_t m = 0; m < minima.size(); ++m) {
            const std::size_t lo = m == 0 ? 0 : minima[m - 1];
            const std::size_t hi = m + 1 == minima.size() ? e.size() - 1 : minima[m + 1];
            const double left = *std::max_element(e.begin() + lo, e.begin() + minima[m] + 1);
            const double right = *std::max_element(e.begin() + minima[m], e.begin() + hi + 1);
            if (e[minima[m]] * 10.0 < left && e[minima[m]] * 10.0 < right) oracle.push_back(t[minima[m]]);
        }
        ASSERT_EQ(events.size(), oracle.size());
        for (std::size_t n = 0; n < events.size(); ++n) {
            EXPECT_EQ(events[n].n, n + 1);
            EXPECT_NEAR(events[n].t, oracle[n], 2 * h);
            EXPECT_LT(events[n].rate_before, 0.0);
            EXPECT_GT(events[n].rate_after, 0.0);
            EXPECT_GT(events[n].epsilon, 0.0);
            EXPECT_NEAR(events[n].epsilon, ek(traj->interpolate(events[n].t).du), 1e-12);
        }
    }
}

TEST(Reflections, GenericPresetHasSixPronouncedBounces) {
    const auto events = detect_reflections(generic_run());
    ASSERT_EQ(events.size(), 6u);
    for (const auto& ev : events) EXPECT_GE(ev.prominence_decades, 1.0);
}
