#include "bkl/exact_solution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "bkl/dynamics.hpp"
#include "bkl/ode.hpp"

namespace bkl {

namespace {

double checked_tau(double t, const ExactParams& params) {
    if (params.branch != 1 && params.branch != -1) throw DomainError("exact: branch must be +1 or -1");
    const double tau = t - params.t0;
    if (!std::isfinite(tau) || tau == 0.0) throw DomainError("exact: t must differ from t0");
    if ((tau > 0.0 ? 1 : -1) != params.branch) throw DomainError("exact: t lies on the other branch");
    return tau;
}

}  // namespace

template <Chart C>
PhasePoint<C> exact_state(double t, const ExactParams& params) {
    const double tau = checked_tau(t, params);
    const double L = std::log(std::abs(tau));
    if constexpr (C == Chart::scale_factors) {
        const double m = std::abs(tau);
        const double sgn = tau > 0.0 ? 1.0 : -1.0;
        const double m2 = m * m;
        const double m3 = m2 * m;
        const double m5 = m3 * m2;
        return ScaleFactorPoint{t, ScaleFactors{{3.0 / m, 30.0 / m3, 120.0 / m5}},
                                Velocity<C>{{-3.0 * sgn / m2, -90.0 * sgn / (m2 * m2), -600.0 * sgn / (m3 * m3)}}};
    } else if constexpr (C == Chart::log) {
        return LogPoint{t, LogChart{{std::log(3.0) - L, std::log(30.0) - 3.0 * L, std::log(120.0) - 5.0 * L}},
                        Velocity<C>{{-1.0 / tau, -3.0 / tau, -5.0 / tau}}};
    } else if constexpr (C == Chart::diag) {
        return DiagPoint{t,
                         DiagChart{{std::log(10800.0) / 3.0 - 3.0 * L, 0.5 * std::log(40.0) - 2.0 * L,
                                    std::log(2.5) / 6.0}},
                         Velocity<C>{{-3.0 / tau, -2.0 / tau, 0.0}}};
    } else {
        return RatioPoint{t, RatioChart{{std::log(9.0) - 2.0 * L, std::log(10.0) - 2.0 * L, std::log(4.0) - 2.0 * L}},
                          Velocity<C>{{-2.0 / tau, -2.0 / tau, -2.0 / tau}}};
    }
}

template ScaleFactorPoint exact_state(double, const ExactParams&);
template LogPoint exact_state(double, const ExactParams&);
template DiagPoint exact_state(double, const ExactParams&);
template RatioPoint exact_state(double, const ExactParams&);

AnyPhasePoint exact_state(double t, Chart chart, const ExactParams& params) {
    switch (chart) {
        case Chart::scale_factors:
            return exact_state<Chart::scale_factors>(t, params);
        case Chart::log:
            return exact_state<Chart::log>(t, params);
        case Chart::diag:
            return exact_state<Chart::diag>(t, params);
        case Chart::ratio:
            return exact_state<Chart::ratio>(t, params);
    }
    throw DomainError("exact: unknown chart");
}

template <Chart C>
Vec3 exact_acceleration(double t, const ExactParams& params) {
    static_assert(is_log_type(C));
    const double tau = checked_tau(t, params);
    const double inv = 1.0 / (tau * tau);
    if constexpr (C == Chart::log) {
        return {inv, 3.0 * inv, 5.0 * inv};
    } else if constexpr (C == Chart::diag) {
        return {3.0 * inv, 2.0 * inv, 0.0};
    } else {
        return {2.0 * inv, 2.0 * inv, 2.0 * inv};
    }
}

template Vec3 exact_acceleration<Chart::log>(double, const ExactParams&);
template Vec3 exact_acceleration<Chart::diag>(double, const ExactParams&);
template Vec3 exact_acceleration<Chart::ratio>(double, const ExactParams&);

Trajectory exact_trajectory(double t_from, double t_to, double dt, const ExactParams& params) {
    if (!(dt > 0.0) || !(t_to > t_from)) throw DomainError("exact_trajectory: need t_to > t_from and dt > 0");
    checked_tau(t_from, params);
    checked_tau(t_to, params);
    const auto n = static_cast<std::size_t>(std::floor((t_to - t_from) / dt + 1e-9));
    std::vector<TrajectoryPoint> points;
    points.reserve(n + 2);
    auto add = [&](double t) {
        const DiagPoint p = exact_state<Chart::diag>(t, params);
        TrajectoryPoint tp;
        tp.t = t;
        tp.u = p.position.value;
        tp.du = p.velocity.value;
        tp.ddu = exact_acceleration<Chart::diag>(t, params);
        tp.energy = constraint_residual(p);
        points.push_back(tp);
    };
    for (std::size_t k = 0; k <= n; ++k) add(t_from + static_cast<double>(k) * dt);
    if (points.back().t < t_to) add(t_to);
    return Trajectory::from_points(std::move(points), dt);
}

Matrix6 variational_matrix(double t, const ExactParams& params) {
    const DiagPoint p = exact_state<Chart::diag>(t, params);
    const std::array<Vec3, 3> J = rhs_u_jacobian(p.position);
    Matrix6 m{};
    for (int i = 0; i < 3; ++i) {
        m[i][i + 3] = 1.0;
        for (int j = 0; j < 3; ++j) m[i + 3][j] = J[i][j];
    }
    return m;
}

Vec6 operator*(const Matrix6& m, const Vec6& v) {
    Vec6 out{};
    for (std::size_t i = 0; i < 6; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 6; ++j) acc += m[i][j] * v[j];
        out[i] = acc;
    }
    return out;
}

namespace {

/// Gradient of H with respect to (u, u') along the exact solution.
Vec6 constraint_gradient(const DiagPoint& p) {
    const Vec3 e = exponentials(p.position);
    const double q = e[0];
    const double r = e[1];
    const double s = e[2];
    const Vec3& v = p.velocity.value;
    return {-2.0 * q, 2.0 * q - r - s, 2.0 * q - 3.0 * r + 3.0 * s, 6.0 * v[0], -2.0 * v[1], -6.0 * v[2]};
}

double dot6(const Vec6& a, const Vec6& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 6; ++i) acc += a[i] * b[i];
    return acc;
}

void enforce_constraint(Vec6& d, const DiagPoint& p) {
    const Vec6 g = constraint_gradient(p);
    d[3] -= dot6(g, d) / g[3];
}

/// Positions and velocities are scaled as two groups so that components
/// passing through zero do not tighten the tolerance.
struct GroupScale {
    double rel_tol;
    double abs_tol;

    void operator()(const ode::State<6>& y0, const ode::State<6>& y1, ode::State<6>& sc) const {
        for (int g = 0; g < 2; ++g) {
            double m = 0.0;
            for (int i = 3 * g; i < 3 * g + 3; ++i) m = std::max({m, std::abs(y0[i]), std::abs(y1[i])});
            for (int i = 3 * g; i < 3 * g + 3; ++i) sc[i] = abs_tol + rel_tol * m;
        }
    }
};

// Left eigenvector of M diag(9, 10, 4) for the eigenvalue shared by the
// time-shift mode; its right eigenvector is (1, 1, 1).
constexpr Vec3 kSecularLeft{9.0, 10.0, 4.0};

Vec3 remove_secular(const Vec3& dy) {
    const double c = (kSecularLeft[0] * dy[0] + kSecularLeft[1] * dy[1] + kSecularLeft[2] * dy[2]) / 23.0;
    return {dy[0] - c, dy[1] - c, dy[2] - c};
}

}  // namespace

double linearized_constraint(const Vec6& deviation, double t, const ExactParams& params) {
    return dot6(constraint_gradient(exact_state<Chart::diag>(t, params)), deviation);
}

PerturbationRun integrate_perturbation(const Vec6& seed, double horizon, const PerturbationParams& params) {
    if (params.exact.branch != 1) throw DomainError("perturbation: only the tau > 0 branch is supported");
    if (!(params.tau_start > 0.0)) throw DomainError("perturbation: tau_start must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("perturbation: horizon must be positive");
    if (params.samples < 16) throw DomainError("perturbation: need at least 16 samples");

    const ExactParams ex = params.exact;
    const double t_begin = ex.t0 + params.tau_start;
    const double t_final = ex.t0 + params.tau_start * std::exp(horizon);
    const double ds = horizon / static_cast<double>(params.samples - 1);

    PerturbationRun run;
    run.s.resize(params.samples);
    run.t.resize(params.samples);
    for (std::size_t k = 0; k < params.samples; ++k) {
        run.s[k] = static_cast<double>(k) * ds;
        run.t[k] = ex.t0 + params.tau_start * std::exp(run.s[k]);
    }
    run.t.front() = t_begin;
    run.t.back() = t_final;
    run.deviation.assign(params.samples, Vec6{});
    run.oscillatory.assign(params.samples, Vec3{});

    double norm = 0.0;
    for (double v : seed) {
        if (!std::isfinite(v)) throw DomainError("perturbation: non-finite seed");
        norm = std::max(norm, std::abs(v));
    }
    run.seed_norm = norm;
    if (norm == 0.0) return run;

    Vec6 unit{};
    for (std::size_t i = 0; i < 6; ++i) unit[i] = seed[i] / norm;
    enforce_constraint(unit, exact_state<Chart::diag>(t_begin, ex));

    auto rhs = [ex](double t, const ode::State<6>& y, ode::State<6>& f) {
        const Matrix6 m = variational_matrix(t, ex);
        f = m * y;
    };
    ode::StepControl control;
    control.rel_tol = params.rel_tol;
    control.abs_tol = params.abs_tol;
    ode::DormandPrince45<6, decltype(rhs), GroupScale> stepper(rhs, control,
                                                               GroupScale{params.rel_tol, params.abs_tol});
    stepper.initialize(t_begin, unit, t_final);

    std::size_t k = 0;
    auto store = [&](std::size_t idx, const Vec6& y) {
        Vec6 d{};
        for (std::size_t i = 0; i < 6; ++i) d[i] = norm * y[i];
        run.deviation[idx] = d;
        const Vec3 du{d[0], d[1], d[2]};
        run.oscillatory[idx] = remove_secular(maps::diag_to_ratio.apply(du));
        const Vec3 dx = maps::diag_to_log.apply(du);
        for (double v : dx) run.max_relative_deviation = std::max(run.max_relative_deviation, std::abs(v));
    };
    store(k++, unit);

    std::size_t steps = 0;
    while (stepper.t() < t_final) {
        if (++steps > params.max_steps) throw FitFailure("perturbation: step budget exhausted");
        const ode::Step<6> step = stepper.step(t_final);
        while (k < params.samples && run.t[k] <= step.t1) {
            store(k, run.t[k] == step.t1 ? step.y1 : ode::hermite(step, run.t[k]));
            ++k;
        }
        Vec6 y = stepper.y();
        enforce_constraint(y, exact_state<Chart::diag>(stepper.t(), ex));
        stepper.reset_state(y);
    }
    while (k < params.samples) {
        store(k++, stepper.y());
    }

    if (!(run.max_relative_deviation <= params.linearity_cap)) {
        throw LinearityCapExceeded("perturbation: max |dx| = " + std::to_string(run.max_relative_deviation) +
                                   " exceeds the linearity cap " + std::to_string(params.linearity_cap));
    }
    return run;
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    return f;
}

/// Slope of ln(windowed RMS of amplitude) against s.
double growth_exponent(const std::vector<double>& s, const std::vector<double>& amplitude, double window) {
    std::vector<double> xs, ys;
    std::size_t i = 0;
    const double s0 = s.front();
    while (i < s.size()) {
        const double w_end = s0 + window * (std::floor((s[i] - s0) / window) + 1.0);
        double acc = 0.0;
        double mid = 0.0;
        std::size_t count = 0;
        for (; i < s.size() && s[i] < w_end; ++i) {
            acc += amplitude[i] * amplitude[i];
            mid += s[i];
            ++count;
        }
        if (count >= 4 && w_end <= s.back() + 1e-12 && acc > 0.0) {
            xs.push_back(mid / static_cast<double>(count));
            ys.push_back(0.5 * std::log(acc / static_cast<double>(count)));
        }
    }
    if (xs.size() < 3) throw FitFailure("perturbation: too few windows for a growth fit");
    return fit_line(xs, ys).slope;
}

}  // namespace

void fit_perturbation(PerturbationRun& run, const PerturbationParams& params) {
    const std::size_t n = run.s.size();
    if (n < 16 || run.seed_norm == 0.0) throw FitFailure("perturbation: no deviation to fit");
    const double horizon = run.s.back() - run.s.front();
    const ExactParams ex = params.exact;

    std::vector<double> rel(n), abs_amp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec3 dx = maps::ratio_to_log.apply(run.oscillatory[k]);
        rel[k] = std::hypot(dx[0], dx[1], dx[2]);
        const ScaleFactorPoint sf = exact_state<Chart::scale_factors>(run.t[k], ex);
        abs_amp[k] = std::hypot(sf.position.a() * dx[0], sf.position.b() * dx[1], sf.position.c() * dx[2]);
    }

    // First pass with a provisional window of about one slow period.
    double g = growth_exponent(run.s, rel, 2.0);

    const double ds = horizon / static_cast<double>(n - 1);
    std::vector<double> hann(n);
    for (std::size_t k = 0; k < n; ++k) {
        hann[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1));
    }
    std::array<std::vector<double>, 3> z;
    for (int j = 0; j < 3; ++j) {
        z[j].resize(n);
        double mean = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            z[j][k] = run.oscillatory[k][j] * std::exp(-g * run.s[k]);
            mean += z[j][k];
        }
        mean /= static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) z[j][k] = (z[j][k] - mean) * hann[k];
    }

    const double resolution = 2.0 * std::numbers::pi / horizon;
    const double d_omega = resolution / 16.0;
    const double omega_min = 2.0 * resolution;
    const double omega_max = std::min(40.0, 0.5 * std::numbers::pi / ds);
    std::vector<double> omega, power;
    for (double w = omega_min; w <= omega_max; w += d_omega) {
        double p = 0.0;
        for (int j = 0; j < 3; ++j) {
            std::complex<double> acc{0.0, 0.0};
            const std::complex<double> rot = std::polar(1.0, -w * ds);
            std::complex<double> ph = std::polar(1.0, -w * run.s.front());
            for (std::size_t k = 0; k < n; ++k) {
                acc += z[j][k] * ph;
                ph *= rot;
            }
            p += std::norm(acc);
        }
        omega.push_back(w);
        power.push_back(p);
    }

    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < power.size(); ++i) {
        if (power[i] > power[i - 1] && power[i] >= power[i + 1]) peaks.push_back(i);
    }
    std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return power[a] > power[b]; });
    if (peaks.empty()) throw FitFailure("perturbation: no spectral peak");
    const std::size_t first = peaks.front();
    std::size_t second = 0;
    bool found = false;
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        // Hann main lobe half-width is two resolution bins.
        if (std::abs(omega[peaks[i]] - omega[first]) > 4.0 * resolution) {
            second = peaks[i];
            found = true;
            break;
        }
    }
    if (!found) throw FitFailure("perturbation: fewer than two distinct spectral peaks");

    auto refine = [&](std::size_t i) {
        const double a = power[i - 1], b = power[i], c = power[i + 1];
        const double denom = a - 2.0 * b + c;
        const double shift = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
        return omega[i] + std::clamp(shift, -0.5, 0.5) * d_omega;
    };
    const double w_a = refine(first);
    const double w_b = refine(second);
    run.omega1 = std::min(w_a, w_b);
    run.omega2 = std::max(w_a, w_b);
    run.frequency_ratio = run.omega2 / run.omega1;
    run.periods_covered = horizon * run.omega1 / (2.0 * std::numbers::pi);

    const double slow_period = 2.0 * std::numbers::pi / run.omega1;
    run.relative_growth_exponent = growth_exponent(run.s, rel, slow_period);
    run.absolute_growth_exponent = growth_exponent(run.s, abs_amp, slow_period);

    if (run.periods_covered < params.min_periods) {
        throw FitFailure("perturbation: horizon covers only " + std::to_string(run.periods_covered) +
                         " slow periods, need " + std::to_string(params.min_periods));
    }
}

PerturbationRun perturbation_run(const Vec6& seed, double horizon, const PerturbationParams& params) {
    PerturbationRun run = integrate_perturbation(seed, horizon, params);
    fit_perturbation(run, params);
    return run;
}

std::array<double, 2> linearized_frequencies() {
    // A = M diag(9, 10, 4); (1, 1, 1) is an eigenvector with eigenvalue 2,
    // the other two follow from the trace and determinant.
    const Vec3 w{9.0, 10.0, 4.0};
    std::array<Vec3, 3> a{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            a[i][j] = static_cast<double>(CouplingMatrix::M.num[i][j]) * w[j] /
                      static_cast<double>(CouplingMatrix::M.den);
        }
    }
    const double trace = a[0][0] + a[1][1] + a[2][2];
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    const double sum = trace - 2.0;
    const double prod = det / 2.0;
    const double disc = std::sqrt(sum * sum - 4.0 * prod);
    const double mu_a = 0.5 * (sum + disc);
    const double mu_b = 0.5 * (sum - disc);
    return {std::sqrt(-mu_a - 0.25), std::sqrt(-mu_b - 0.25)};
}

double ApexReport::max_distance() const {
    return std::max({std::abs(distance[0]), std::abs(distance[1]), std::abs(distance[2])});
}

ApexReport apex_asymptotics(const Trajectory& traj, const ApexOptions& opts) {
    if (!(opts.tail_fraction > 0.0 && opts.tail_fraction < 1.0)) throw DomainError("apex: tail_fraction in (0, 1)");
    if (opts.windows < 2) throw DomainError("apex: need at least two windows");
    const auto& samples = traj.samples();
    const std::size_t n = samples.size();
    const auto m = static_cast<std::size_t>(std::ceil(opts.tail_fraction * static_cast<double>(n)));
    if (m < 100) throw InsufficientSamples("apex: tail has " + std::to_string(m) + " samples, need 100");
    const std::size_t first = n - m;
    const std::size_t per = m / opts.windows;

    std::vector<double> window_du1(opts.windows, 0.0);
    for (std::size_t w = 0; w < opts.windows; ++w) {
        const std::size_t lo = first + w * per;
        const std::size_t hi = w + 1 == opts.windows ? n : lo + per;
        for (std::size_t i = lo; i < hi; ++i) {
            if (!(samples[i].du[0] < 0.0)) throw NotApexApproaching("apex: u1' is not negative on the tail");
            window_du1[w] += std::abs(samples[i].du[0]) / static_cast<double>(hi - lo);
        }
        if (w > 0 && !(window_du1[w] < window_du1[w - 1])) {
            throw NotApexApproaching("apex: |u1'| window means do not decrease");
        }
    }

    ApexReport r;
    r.tail_samples = m;
    std::vector<double> ts, inv;
    for (std::size_t i = first; i < n; ++i) {
        const double dy1 = maps::diag_to_ratio.apply(samples[i].du)[0];
        const double v = 1.0 / dy1;
        if (std::isfinite(v)) {
            ts.push_back(samples[i].t);
            inv.push_back(v);
        }
    }
    if (ts.size() < 3) throw InsufficientSamples("apex: y1' vanishes on the tail");
    r.inverse_rate_slope = fit_line(ts, inv).slope;

    const std::size_t last_lo = first + (opts.windows - 1) * per;
    double d21 = 0.0, d31 = 0.0;
    double min2 = std::numeric_limits<double>::infinity(), max2 = -min2, min3 = min2, max3 = -min2;
    for (std::size_t i = last_lo; i < n; ++i) {
        const Vec3 y = maps::diag_to_ratio.apply(samples[i].u);
        const Vec3 ddy = maps::diag_to_ratio.apply(samples[i].ddu);
        d21 += y[1] - y[0];
        d31 += y[2] - y[0];
        const double q2 = ddy[1] / ddy[0];
        const double q3 = ddy[2] / ddy[0];
        min2 = std::min(min2, q2);
        max2 = std::max(max2, q2);
        min3 = std::min(min3, q3);
        max3 = std::max(max3, q3);
    }
    const double count = static_cast<double>(n - last_lo);
    r.y2_minus_y1 = d21 / count;
    r.y3_minus_y1 = d31 / count;
    r.distance = {r.y2_minus_y1 - std::log(10.0 / 9.0), r.y3_minus_y1 - std::log(4.0 / 9.0),
                  r.inverse_rate_slope + 0.5};

    const TrajectoryPoint& end = samples.back();
    r.du2_over_du1 = end.du[1] / end.du[0];
    r.du3_over_du1 = end.du[2] / end.du[0];
    const Vec3 ddy_end = maps::diag_to_ratio.apply(end.ddu);
    r.ddy2_over_ddy1 = ddy_end[1] / ddy_end[0];
    r.ddy3_over_ddy1 = ddy_end[2] / ddy_end[0];
    r.ratio_spread2 = max2 - min2;
    r.ratio_spread3 = max3 - min3;
    r.ratios_converge = r.ratio_spread2 < opts.ratio_convergence_threshold &&
                        r.ratio_spread3 < opts.ratio_convergence_threshold;
    return r;
}

}  // namespace bkl
