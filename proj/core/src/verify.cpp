#include "bkl/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>

#include <json.hpp>

#include "bkl/config.hpp"
#include "bkl/dynamics.hpp"
#include "bkl/epoch_analysis.hpp"
#include "bkl/exact_solution.hpp"
#include "bkl/integrator.hpp"

namespace bkl::verify {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

class Recorder {
public:
    explicit Recorder(CheckResult& r) : r_(r) {}

    void le(const std::string& name, double value, double bound) {
        add(name, value, "<=", bound, 0.0, value <= bound);
    }
    void lt(const std::string& name, double value, double bound) {
        add(name, value, "<", bound, 0.0, value < bound);
    }
    void ge(const std::string& name, double value, double bound) {
        add(name, value, ">=", bound, 0.0, value >= bound);
    }
    void within(const std::string& name, double value, double target, double tol) {
        add(name, value, "within", target, tol, std::abs(value - target) <= tol);
    }
    void truth(const std::string& name, bool ok) { add(name, ok ? 1.0 : 0.0, "true", 1.0, 0.0, ok); }
    void info(const std::string& name, double value) { add(name, value, "info", 0.0, 0.0, true); }

private:
    void add(const std::string& name, double v, const char* rel, double target, double tol, bool ok) {
        r_.measurements.push_back(Measurement{name, v, rel, target, tol, ok});
    }
    CheckResult& r_;
};

/// max_i |a_i - b_i| / max_i |b_i|
template <std::size_t N>
double normwise(const std::array<double, N>& a, const std::array<double, N>& b) {
    double d = 0.0;
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        m = std::max(m, std::abs(b[i]));
    }
    return m > 0.0 ? d / m : d;
}

/// Difference in units of the spacing of doubles at the largest component.
double ulps(const Vec3& a, const Vec3& b) {
    double m = 0.0;
    double d = 0.0;
    for (int i = 0; i < 3; ++i) {
        m = std::max(m, std::abs(b[i]));
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    if (m == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    const double spacing = std::nextafter(m, std::numeric_limits<double>::infinity()) - m;
    return d / spacing;
}

struct Runs {
    RunConfig generic_cfg = preset("generic-collapse");
    RunConfig exact_cfg = preset("exact");
    Trajectory generic = integrate(initial_condition(generic_cfg), generic_cfg.integrator);
    Trajectory exact = integrate(initial_condition(exact_cfg), exact_cfg.integrator);
    std::vector<ReflectionEvent> generic_events = detect_reflections(generic);
};

const Runs& runs() {
    static const Runs r;
    return r;
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------- acceptance

void exact_solution_residual(Recorder& rec) {
    double eq[3] = {0.0, 0.0, 0.0};
    double kin = 0.0, pot = 0.0, total = 0.0;
    for (double tau : {0.1, 1.0, 10.0, 100.0}) {
        const ScaleFactorPoint sf = exact_state<Chart::scale_factors>(tau);
        const Vec3 acc = rhs_abc(sf.position).acceleration;
        const double inv = 1.0 / (tau * tau);
        const Vec3 target{inv, 3.0 * inv, 5.0 * inv};
        for (int i = 0; i < 3; ++i) eq[i] = std::max(eq[i], relative(acc[i], target[i]));
        const EnergySplit e = constraint_residual(sf);
        kin = std::max(kin, relative(e.kinetic, 23.0 * inv));
        pot = std::max(pot, relative(e.potential, -23.0 * inv));
        total = std::max(total, std::abs(e.total) / e.kinetic);
    }
    rec.le("first_equation_relative", eq[0], 1e-13);
    rec.le("second_equation_relative", eq[1], 1e-13);
    rec.le("third_equation_relative", eq[2], 1e-13);
    rec.le("kinetic_vs_23_over_tau2", kin, 1e-13);
    rec.le("potential_vs_minus_23_over_tau2", pot, 1e-13);
    rec.le("constraint_relative", total, 1e-13);
}

void oracle_integration(Recorder& rec) {
    IntegratorParams p;
    p.rel_tol = 1e-10;
    p.abs_tol = 1e-12;
    p.t_end = 10.0;
    const Trajectory traj = integrate(exact_state<Chart::diag>(1.0), p);
    rec.truth("completed", traj.completed());
    const ScaleFactorPoint end = convert<Chart::scale_factors>(traj.steps().back().point());
    rec.within("t_end", end.t, 10.0, 0.0);
    rec.le("a_relative_error", relative(end.position.a(), 0.3), 1e-6);
    rec.le("b_relative_error", relative(end.position.b(), 0.03), 1e-6);
    rec.le("c_relative_error", relative(end.position.c(), 1.2e-3), 1e-6);
    rec.le("max_step_drift", traj.max_step_drift(), 1e-8);
    rec.le("max_sample_drift", traj.max_sample_drift(), 1e-8);
}

void generic_invariants(Recorder& rec) {
    const Trajectory& traj = runs().generic;
    rec.truth("completed", traj.completed());
    rec.within("t_end", traj.t_end(), 100.0, 0.0);
    const StepAudit a = audit_steps(traj);
    rec.info("accepted_steps", static_cast<double>(a.steps));
    rec.truth("cone_confinement_min_kinetic_positive", a.min_kinetic > 0.0);
    rec.info("min_kinetic", a.min_kinetic);
    rec.lt("max_du1", a.max_du1, 0.0);
    rec.ge("du1_min_increment_slack", a.min_combination_slack[0], 0.0);
    rec.ge("combo_4du1_du2_du3_min_increment_slack", a.min_combination_slack[1], 0.0);
    rec.ge("combo_2du1_du2_du3_min_increment_slack", a.min_combination_slack[2], 0.0);
    rec.truth("ddu1_positive_every_step", a.min_ddu1 > 0.0);
    rec.le("max_abs_du2_over_sqrt3_abs_du1", a.max_du2_ratio, 1.0);
    rec.le("max_abs_du3_over_abs_du1", a.max_du3_ratio, 1.0);
    rec.le("acceleration_identity_relative", a.max_identity_relative, 1e-10);
    rec.truth("no_interior_stop", a.no_interior_stop());
    rec.info("max_drift", a.max_drift);
}

void quasi_kasner(Recorder& rec) {
    const Trajectory& traj = runs().generic;
    const auto& ev = runs().generic_events;
    rec.ge("reflections", static_cast<double>(ev.size()), 3.0);
    bool sign_change = true;
    double min_eps = std::numeric_limits<double>::infinity();
    for (const auto& e : ev) {
        sign_change = sign_change && e.rate_before < 0.0 && e.rate_after > 0.0;
        min_eps = std::min(min_eps, e.epsilon);
    }
    rec.truth("refined_rate_changes_sign", sign_change);
    rec.truth("epsilon_positive", min_eps > 0.0);

    double min_span = std::numeric_limits<double>::infinity();
    const auto& s = traj.samples();
    for (std::size_t n = 0; n + 1 < ev.size(); ++n) {
        double peak = 0.0;
        for (const auto& p : s) {
            if (p.t > ev[n].t && p.t < ev[n + 1].t) peak = std::max(peak, p.energy.kinetic);
        }
        const double floor = std::min(ev[n].epsilon, ev[n + 1].epsilon);
        min_span = std::min(min_span, std::log10(peak / floor));
    }
    rec.ge("min_decades_between_reflections", min_span, 4.0);

    const auto epochs = epoch_segments(traj, ev, runs().generic_cfg.analysis.epoch_delta);
    rec.ge("epochs", static_cast<double>(epochs.size()), 1.0);
    double sum_err = 0.0, quad = 0.0;
    bool one_negative = true;
    for (const auto& e : epochs) {
        sum_err = std::max(sum_err, std::abs(e.p[0] + e.p[1] + e.p[2] - 1.0));
        quad = std::max(quad, e.kasner_quadratic_residual);
        one_negative = one_negative && e.negative_exponents == 1;
    }
    rec.le("max_abs_sum_p_minus_1", sum_err, 4.0 * kEps);
    rec.lt("max_abs_sum_p2_minus_1", quad, 1e-2);
    rec.truth("exactly_one_negative_exponent", one_negative);
}

void instability(Recorder& rec) {
    const RunConfig cfg = preset("perturbation");
    const PerturbationParams params = cfg.perturbation.params();
    const PerturbationRun run = perturbation_run(cfg.perturbation.seed, cfg.perturbation.horizon, params);
    rec.within("frequency_ratio", run.frequency_ratio, 2.06, 0.05);
    rec.within("relative_growth_exponent", run.relative_growth_exponent, 0.5, 0.1);
    rec.ge("slow_periods_covered", run.periods_covered, 30.0);
    rec.lt("absolute_growth_exponent", run.absolute_growth_exponent, 0.0);
    rec.le("max_relative_deviation", run.max_relative_deviation, params.linearity_cap);
    rec.info("omega1", run.omega1);
    rec.info("omega2", run.omega2);
}

void apex(Recorder& rec) {
    const ApexReport ex = apex_asymptotics(runs().exact);
    rec.within("exact_y2_minus_y1", ex.y2_minus_y1, std::log(10.0 / 9.0), 1e-6);
    rec.within("exact_y3_minus_y1", ex.y3_minus_y1, std::log(4.0 / 9.0), 1e-6);
    rec.within("exact_d_inverse_dy1_dt", ex.inverse_rate_slope, -0.5, 1e-6);
    rec.within("exact_du2_over_du1", ex.du2_over_du1, 2.0 / 3.0, 1e-6);
    rec.within("exact_du3_over_du1", ex.du3_over_du1, 0.0, 1e-6);
    rec.truth("exact_direction_ratios_converge", ex.ratios_converge);

    const ApexReport ge = apex_asymptotics(runs().generic);
    rec.truth("generic_non_convergence_flag", ge.non_convergence_flag());
    rec.info("generic_ratio_spread_ddy2_over_ddy1", ge.ratio_spread2);
    rec.info("generic_ratio_spread_ddy3_over_ddy1", ge.ratio_spread3);
    const auto& a = runs().generic_cfg.analysis;
    const LimitReport lr = limit_estimates(runs().generic, a.tail_fraction, a.tail_windows);
    rec.truth("generic_abs_dy1_window_means_decrease", lr.dy[0].magnitude_decreasing);
    rec.truth("generic_abs_dy2_window_means_decrease", lr.dy[1].magnitude_decreasing);
    for (std::size_t w = 0; w < lr.dy[0].window_magnitudes.size(); ++w) {
        rec.info("generic_abs_dy1_window" + std::to_string(w + 1), lr.dy[0].window_magnitudes[w]);
        rec.info("generic_abs_dy2_window" + std::to_string(w + 1), lr.dy[1].window_magnitudes[w]);
    }
}

/// Group-wise (positions, velocities) norm-relative distance of two points.
double phase_distance(const DiagPoint& a, const DiagPoint& b) {
    return std::max(normwise(a.position.value, b.position.value), normwise(a.velocity.value, b.velocity.value));
}

void time_reversal(Recorder& rec, const std::string& label, const RunConfig& cfg, const Trajectory& fwd) {
    const DiagPoint ic = std::get<DiagPoint>(convert(initial_condition(cfg), Chart::diag));
    IntegratorParams back = cfg.integrator;
    back.t_end = -ic.t;
    back.constraint_tolerance = std::max(back.constraint_tolerance, 10.0 * fwd.max_drift());
    const Trajectory rev = integrate(time_reverse(fwd.steps().back().point()), back);
    rec.truth(label + "_reverse_completed", rev.completed());
    const DiagPoint recovered = time_reverse(rev.steps().back().point());
    rec.le(label + "_round_trip_relative", phase_distance(recovered, ic), 1e-6);
}

void scaling(Recorder& rec, const std::string& label, const RunConfig& cfg, const Trajectory& base) {
    constexpr double lambda = 2.0;
    const DiagPoint ic = std::get<DiagPoint>(convert(initial_condition(cfg), Chart::diag));
    IntegratorParams p = cfg.integrator;
    p.t_end = lambda * cfg.integrator.t_end;
    p.dense_sample_dt = lambda * cfg.integrator.dense_sample_dt;
    const Trajectory scaled = integrate(scale_map(ic, lambda), p);
    rec.truth(label + "_scaled_completed", scaled.completed());
    const auto& a = base.samples();
    const auto& b = scaled.samples();
    rec.truth(label + "_sample_grids_match", a.size() == b.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
        worst = std::max(worst, phase_distance(b[k].point(), scale_map(a[k].point(), lambda)));
    }
    const double budget = base.accumulated_error() * cfg.integrator.rel_tol;
    rec.le(label + "_scaling_difference", worst, 10.0 * budget);
    rec.info(label + "_scaling_difference_over_rel_tol", worst / cfg.integrator.rel_tol);
}

void symmetry(Recorder& rec) {
    time_reversal(rec, "generic", runs().generic_cfg, runs().generic);
    time_reversal(rec, "exact", runs().exact_cfg, runs().exact);
    scaling(rec, "generic", runs().generic_cfg, runs().generic);
    scaling(rec, "exact", runs().exact_cfg, runs().exact);
}

// ---------------------------------------------------------------- invariants

void chart_round_trips(Recorder& rec) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> pos(-50.0, 50.0);
    std::uniform_real_distribution<double> vel(-5.0, 5.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const LogPoint x{0.0, LogChart{{pos(rng), pos(rng), pos(rng)}}, Velocity<Chart::log>{{vel(rng), vel(rng), vel(rng)}}};
        const LogPoint via_u = convert<Chart::log>(convert<Chart::diag>(x));
        const LogPoint via_y = convert<Chart::log>(convert<Chart::ratio>(x));
        for (const LogPoint* p : {&via_u, &via_y}) {
            worst = std::max({worst, ulps(p->position.value, x.position.value), ulps(p->velocity.value, x.velocity.value)});
        }
    }
    rec.le("max_round_trip_ulps", worst, 4.0);

    std::uniform_real_distribution<double> lg(-6.0, 6.0);
    double u1_ulps = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const ScaleFactors sf{{std::exp(lg(rng)), std::exp(lg(rng)), std::exp(lg(rng))}};
        const DiagPoint u = convert<Chart::diag>(ScaleFactorPoint{0.0, sf, {}});
        const long double ref = (std::log(static_cast<long double>(sf.a())) + std::log(static_cast<long double>(sf.b())) +
                                 std::log(static_cast<long double>(sf.c()))) / 3.0L;
        const double scale = std::max({std::abs(std::log(sf.a())), std::abs(std::log(sf.b())), std::abs(std::log(sf.c()))});
        const double spacing = std::nextafter(scale, 1e300) - scale;
        u1_ulps = std::max(u1_ulps, static_cast<double>(std::abs(u.position[0] - ref)) / spacing);
    }
    rec.le("u1_vs_third_log_volume_ulps", u1_ulps, 4.0);
}

void coupling_matrix(Recorder& rec) {
    const auto det = determinant(CouplingMatrix::M);
    rec.truth("det_M_equals_2", det.first == 2 && det.second == 1);
    rec.truth("M_times_inverse_is_identity", CouplingMatrix::M * CouplingMatrix::inverse == kIdentity3);
    rec.truth("inverse_times_M_is_identity", CouplingMatrix::inverse * CouplingMatrix::M == kIdentity3);
    const auto d = determinant(maps::diag_to_log);
    rec.truth("diag_transform_determinant_minus_6", d.first == -6 && d.second == 1);
}

void first_integral_identities(Recorder& rec) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    double worst = 0.0;
    bool positive = true;
    for (int k = 0; k < 1000; ++k) {
        const DiagChart u{{pos(rng), pos(rng), pos(rng)}};
        const RhsResult r = rhs_u(u);
        positive = positive && r.acceleration[0] > 0.0;
        worst = std::max(worst, ulps(first_integral_combinations(r.acceleration), r.exponentials));
    }
    rec.truth("ddu1_positive", positive);
    rec.le("combination_identity_ulps", worst, 4.0);
}

void cross_chart_rhs(Recorder& rec) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const LogChart x{{pos(rng), pos(rng), pos(rng)}};
        const Vec3 direct = rhs_x(x).acceleration;
        const Vec3 from_u = maps::diag_to_log.apply(rhs_u(DiagChart{maps::log_to_diag.apply(x.value)}).acceleration);
        const Vec3 from_y = maps::ratio_to_log.apply(rhs_y(RatioChart{maps::log_to_ratio.apply(x.value)}).acceleration);
        const ScaleFactors sf{{std::exp(x[0]), std::exp(x[1]), std::exp(x[2])}};
        const Vec3 from_abc = rhs_abc(sf).acceleration;
        worst = std::max({worst, normwise(from_u, direct), normwise(from_y, direct), normwise(from_abc, direct)});
    }
    rec.le("max_relative_difference", worst, 1e-12);
}

void constrained_identities(Recorder& rec) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    std::uniform_real_distribution<double> vel(-3.0, 3.0);
    double identity = 0.0;
    double third = 0.0;
    bool inside = true;
    for (int k = 0; k < 1000; ++k) {
        const DiagPoint p = constrained_point(0.0, DiagChart{{pos(rng), pos(rng), pos(rng)}}, vel(rng), vel(rng));
        const RhsResult r = rhs_u(p.position);
        const double ek = kinetic_energy(p.velocity);
        const double scale = std::abs(2.0 * r.acceleration[1]) + std::abs(9.0 * r.acceleration[0]) + ek;
        identity = std::max(identity, std::abs(acceleration_identity_residual(p)) / scale);
        try {
            third = std::max(third, third_equation_residual(p).relative());
        } catch (const IndeterminateError&) {
        }
        const Vec3& v = p.velocity.value;
        inside = inside && ek > 0.0 && v[1] * v[1] + 3.0 * v[2] * v[2] < 3.0 * v[0] * v[0];
    }
    rec.le("acceleration_identity_relative", identity, 1e-12);
    rec.le("third_equation_relative", third, 1e-11);
    rec.truth("strictly_inside_cone", inside);
}

void variational_jacobian(Recorder& rec) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> tau(0.5, 50.0);
    double worst = 0.0;
    double diag11 = 0.0;
    double antisym = 0.0;
    constexpr double h = 1e-6;
    for (int k = 0; k < 20; ++k) {
        const double t = tau(rng);
        const Matrix6 m = variational_matrix(t);
        const Vec3 u = exact_state<Chart::diag>(t).position.value;
        double diff = 0.0;
        double size = 0.0;
        for (int j = 0; j < 3; ++j) {
            Vec3 up = u, um = u;
            up[j] += h;
            um[j] -= h;
            const Vec3 fp = rhs_u(DiagChart{up}).acceleration;
            const Vec3 fm = rhs_u(DiagChart{um}).acceleration;
            for (int i = 0; i < 3; ++i) {
                const double fd = (fp[i] - fm[i]) / (2.0 * h);
                diff = std::max(diff, std::abs(fd - m[i + 3][j]));
                size = std::max(size, std::abs(m[i + 3][j]));
            }
        }
        worst = std::max(worst, diff / size);
        const double expected = 6.0 / (t * t);
        diag11 = std::max(diag11, relative(m[3][0], expected));
        antisym = std::max(antisym, std::abs(m[3][1] + m[3][0]) / expected);
    }
    rec.le("max_relative_difference_vs_central_differences", worst, 1e-6);
    rec.le("d_ddu1_d_u1_vs_6_over_tau2", diag11, 1e-12);
    rec.le("d_ddu1_d_u2_plus_d_ddu1_d_u1", antisym, 1e-12);
}


void kasner_properties(Recorder& rec) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> vel(-3.0, 3.0);
    std::uniform_int_distribution<int> power(-20, 20);
    bool exact_pow2 = true;
    double general = 0.0;
    double cone = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Velocity<Chart::log> dx{{vel(rng), vel(rng), vel(rng)}};
        const KasnerTriple p(dx);
        const double k2 = std::ldexp(vel(rng) < 0.0 ? -1.0 : 1.0, power(rng));
        const KasnerTriple q(Velocity<Chart::log>{{k2 * dx[0], k2 * dx[1], k2 * dx[2]}});
        exact_pow2 = exact_pow2 && p.values() == q.values();
        // Rounding of k * dx is amplified by cancellation in the sum.
        const double kk = vel(rng) + 3.5;
        const KasnerTriple r(Velocity<Chart::log>{{kk * dx[0], kk * dx[1], kk * dx[2]}});
        const double cond = (std::abs(dx[0]) + std::abs(dx[1]) + std::abs(dx[2])) / std::abs(dx[0] + dx[1] + dx[2]);
        const double pmax = std::max({std::abs(p[0]), std::abs(p[1]), std::abs(p[2])});
        double d = 0.0;
        for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(r[i] - p[i]));
        general = std::max(general, d / (kEps * cond * pmax));

        const double du2 = vel(rng);
        const double du3 = vel(rng);
        const double du1 = -std::sqrt((du2 * du2 + 3.0 * du3 * du3) / 3.0);
        const Vec3 x = maps::diag_to_log.apply({du1, du2, du3});
        cone = std::max(cone, KasnerTriple(Velocity<Chart::log>{x}).quadratic_residual());
    }
    rec.truth("invariant_under_power_of_two_scaling", exact_pow2);
    rec.le("general_scaling_error_over_eps_cond", general, 8.0);
    rec.le("on_cone_quadratic_residual", cone, 1e-12);
}

void exact_constraint(Recorder& rec) {
    double worst = 0.0;
    for (double tau : {0.1, 1.0, 10.0, 100.0}) {
        for (Chart c : {Chart::scale_factors, Chart::log, Chart::diag, Chart::ratio}) {
            const EnergySplit e = std::visit([](const auto& p) { return constraint_residual(p); }, exact_state(tau, c));
            worst = std::max(worst, std::abs(e.total) / e.kinetic);
        }
    }
    rec.le("max_constraint_relative", worst, 1e-14);
}

void tolerance_refinement(Recorder& rec) {
    for (const char* name : {"exact", "generic-collapse"}) {
        const RunConfig cfg = preset(name);
        const Trajectory& coarse = std::string(name) == "exact" ? runs().exact : runs().generic;
        IntegratorParams fine = cfg.integrator;
        fine.rel_tol *= 0.5;
        fine.abs_tol *= 0.5;
        const Trajectory refined = integrate(initial_condition(cfg), fine);
        const double change = phase_distance(refined.steps().back().point(), coarse.steps().back().point());
        rec.le(std::string(name) + "_endpoint_change", change, coarse.accumulated_error() * cfg.integrator.rel_tol);
    }
}

void exact_run_structure(Recorder& rec) {
    const Trajectory& traj = runs().exact;
    const auto events = detect_reflections(traj);
    rec.within("reflections", static_cast<double>(events.size()), 0.0, 0.0);
    const auto epochs = epoch_segments(traj, events);
    rec.within("epochs", static_cast<double>(epochs.size()), 0.0, 0.0);
    double closeness = 0.0;
    for (const auto& p : traj.samples()) closeness = std::max(closeness, relative(cone_closeness(p), 23.0 / 27.0));
    rec.le("cone_closeness_vs_23_over_27", closeness, 1e-6);
    const LimitReport lr = limit_estimates(traj, 0.5);
    const Vec3 g = lr.g();
    rec.le("g_estimate_norm_times_horizon", std::max({std::abs(g[0]), std::abs(g[1]), std::abs(g[2])}) * 100.0, 10.0);
    rec.truth("apex_trending", lr.apex_trending);
}

void canonical_drift(Recorder& rec) {
    rec.info("exact_max_drift", runs().exact.max_drift());
    rec.info("generic_max_drift", runs().generic.max_drift());
    rec.le("exact_max_drift_within_abort_ratio", runs().exact.max_drift(), runs().exact_cfg.integrator.drift_abort_ratio);
    rec.le("generic_max_drift_within_abort_ratio", runs().generic.max_drift(),
           runs().generic_cfg.integrator.drift_abort_ratio);
}

struct Entry {
    CheckInfo info;
    std::function<void(Recorder&)> run;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        {{"exact-solution-residual", "Exact solution satisfies the scale-factor equations and constraint", true},
         exact_solution_residual},
        {{"oracle-integration", "Integration from the exact state matches the closed form", true}, oracle_integration},
        {{"generic-invariants", "Per-step invariants on the generic-collapse preset", true}, generic_invariants},
        {{"quasi-kasner-structure", "Reflections and Kasner epochs on the generic-collapse preset", true},
         quasi_kasner},
        {{"instability", "Frequency ratio and growth of perturbations of the exact solution", true}, instability},
        {{"apex-asymptotics", "Apex limits on the exact run, non-convergence on the generic run", true}, apex},
        {{"symmetries", "Time-reversal round trip and scaling equivariance", true}, symmetry},
        {{"chart-round-trips", "Log-type chart conversions invert to within 4 ulp", false}, chart_round_trips},
        {{"coupling-matrix", "Exact rational coupling matrix and chart determinant", false}, coupling_matrix},
        {{"first-integral-identities", "Acceleration combinations equal the exponentials", false},
         first_integral_identities},
        {{"cross-chart-rhs", "Right-hand sides agree across charts", false}, cross_chart_rhs},
        {{"constrained-identities", "Acceleration identity and third-equation dependence", false},
         constrained_identities},
        {{"variational-jacobian", "Variational matrix against central differences", false}, variational_jacobian},
        {{"kasner-properties", "Kasner exponents: scale invariance and cone residual", false}, kasner_properties},
        {{"exact-constraint", "Exact solution satisfies the constraint in every chart", false}, exact_constraint},
        {{"tolerance-refinement", "Halving rel_tol moves the endpoint less than the error estimate", false},
         tolerance_refinement},
        {{"exact-run-structure", "Exact run: no reflections, no epochs, velocities tend to zero", false},
         exact_run_structure},
        {{"canonical-drift", "Constraint drift of the canonical runs", false}, canonical_drift},
    };
    return entries;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::vector<CheckInfo> list_checks() {
    std::vector<CheckInfo> out;
    for (const auto& e : registry()) out.push_back(e.info);
    return out;
}

CheckResult run_check(const std::string& id) {
    CheckResult r;
    r.id = id;
    const auto& reg = registry();
    auto it = std::find_if(reg.begin(), reg.end(), [&](const Entry& e) { return e.info.id == id; });
    if (it == reg.end()) {
        r.detail = "unknown check";
        return r;
    }
    r.title = it->info.title;
    r.acceptance = it->info.acceptance;
    const auto start = std::chrono::steady_clock::now();
    try {
        Recorder rec(r);
        it->run(rec);
    } catch (const std::exception& e) {
        r.detail = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.passed = r.detail.empty() && !r.measurements.empty() &&
               std::all_of(r.measurements.begin(), r.measurements.end(), [](const Measurement& m) { return m.passed; });
    return r;
}

std::vector<CheckResult> run_acceptance() {
    std::vector<CheckResult> out;
    for (const auto& e : registry()) {
        if (e.info.acceptance) out.push_back(run_check(e.info.id));
    }
    return out;
}

std::vector<CheckResult> run_all() {
    std::vector<CheckResult> out;
    for (const auto& e : registry()) out.push_back(run_check(e.info.id));
    return out;
}

std::string summary_line(const CheckResult& r) {
    std::string line = (r.passed ? "PASS " : "FAIL ") + r.id + ": " + r.title;
    std::string parts;
    for (const auto& m : r.measurements) {
        if (m.relation == "info") continue;
        if (!parts.empty()) parts += ", ";
        parts += (m.passed ? "" : "!") + m.name + "=" + format_number(m.value);
        if (m.relation == "within") {
            parts += " (" + format_number(m.target) + "+-" + format_number(m.tolerance) + ")";
        } else if (m.relation != "true") {
            parts += " " + m.relation + " " + format_number(m.target);
        }
    }
    if (!parts.empty()) line += " [" + parts + "]";
    if (!r.detail.empty()) line += " error: " + r.detail;
    return line;
}

std::string report_json(const std::vector<CheckResult>& results) {
    nlohmann::json j;
    j["schema_version"] = 1;
    bool all = true;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& r : results) {
        all = all && r.passed;
        nlohmann::json ms = nlohmann::json::array();
        for (const auto& m : r.measurements) {
            ms.push_back({{"name", m.name},
                          {"value", m.value},
                          {"relation", m.relation},
                          {"target", m.target},
                          {"tolerance", m.tolerance},
                          {"passed", m.passed}});
        }
        checks.push_back({{"id", r.id},
                          {"title", r.title},
                          {"acceptance", r.acceptance},
                          {"passed", r.passed},
                          {"seconds", r.seconds},
                          {"detail", r.detail},
                          {"measurements", ms}});
    }
    j["passed"] = all;
    j["failures"] = nlohmann::json::array();
    for (const auto& r : results) {
        if (!r.passed) j["failures"].push_back(r.id);
    }
    j["checks"] = checks;
    return j.dump(2) + "\n";
}

}  // namespace bkl::verify
