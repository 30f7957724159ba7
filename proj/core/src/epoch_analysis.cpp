#include "bkl/epoch_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bkl/dynamics.hpp"

namespace bkl {

KasnerTriple::KasnerTriple(const Velocity<Chart::log>& dx, double tolerance) {
    const double sum = dx[0] + dx[1] + dx[2];
    const double size = std::abs(dx[0]) + std::abs(dx[1]) + std::abs(dx[2]);
    if (!std::isfinite(sum) || !(std::abs(sum) > tolerance * size)) {
        throw IndeterminateError("Kasner exponents undefined: log velocities sum to zero");
    }
    p_ = {dx[0] / sum, dx[1] / sum, dx[2] / sum};
}

double KasnerTriple::quadratic_residual() const {
    return std::abs(p_[0] * p_[0] + p_[1] * p_[1] + p_[2] * p_[2] - 1.0);
}

int KasnerTriple::negative_count() const {
    return static_cast<int>(std::count_if(p_.begin(), p_.end(), [](double v) { return v < 0.0; }));
}

KasnerTriple kasner_exponents(const Velocity<Chart::log>& dx, double tolerance) {
    return KasnerTriple(dx, tolerance);
}

double cone_closeness(const TrajectoryPoint& p) {
    return p.energy.kinetic / (3.0 * p.du[0] * p.du[0]);
}

std::vector<EpochRecord> epoch_segments(const Trajectory& traj, const std::vector<ReflectionEvent>& events,
                                        double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("epoch_segments: delta must lie in (0, 1]");
    std::vector<EpochRecord> out;
    const auto& s = traj.samples();
    for (std::size_t e = 0; e + 1 < events.size(); ++e) {
        const ReflectionEvent& entry = events[e];
        const ReflectionEvent& exit = events[e + 1];
        auto lo = std::upper_bound(s.begin(), s.end(), entry.t,
                                   [](double v, const TrajectoryPoint& p) { return v < p.t; });
        auto hi = std::lower_bound(s.begin(), s.end(), exit.t,
                                   [](const TrajectoryPoint& p, double v) { return p.t < v; });
        if (lo >= hi) continue;

        auto best_begin = hi, best_end = hi;
        std::ptrdiff_t best_len = 0;
        for (auto it = lo; it != hi;) {
            if (!(cone_closeness(*it) < delta)) {
                ++it;
                continue;
            }
            auto run_end = it;
            while (run_end != hi && cone_closeness(*run_end) < delta) ++run_end;
            if (run_end - it > best_len) {
                best_len = run_end - it;
                best_begin = it;
                best_end = run_end;
            }
            it = run_end;
        }
        if (best_len < 2) continue;

        EpochRecord rec;
        rec.t_start = best_begin == lo ? entry.t : best_begin->t;
        rec.t_end = best_end == hi ? exit.t : (best_end - 1)->t;
        rec.samples = static_cast<std::size_t>(best_len);
        rec.epsilon_entry = entry.epsilon;
        rec.epsilon_exit = exit.epsilon;

        // Trapezoidal time averages over the run.
        Vec3 avg{};
        double closeness = 0.0;
        double span = 0.0;
        for (auto it = best_begin; it + 1 != best_end; ++it) {
            const double h = (it + 1)->t - it->t;
            const Vec3 a = maps::diag_to_log.apply(it->du);
            const Vec3 b = maps::diag_to_log.apply((it + 1)->du);
            for (int i = 0; i < 3; ++i) avg[i] += 0.5 * h * (a[i] + b[i]);
            closeness += 0.5 * h * (cone_closeness(*it) + cone_closeness(*(it + 1)));
            span += h;
        }
        for (double& v : avg) v /= span;
        const KasnerTriple p(Velocity<Chart::log>{avg});
        rec.p = p.values();
        rec.kasner_quadratic_residual = p.quadratic_residual();
        rec.negative_exponents = p.negative_count();
        rec.mean_closeness = closeness / span;
        out.push_back(rec);
    }
    return out;
}

bool LimitReport::cone_bounds_hold(double slack) const {
    const Vec3 v = g();
    return std::abs(v[1]) <= std::sqrt(3.0) * std::abs(v[0]) + slack && std::abs(v[2]) <= std::abs(v[0]) + slack;
}

namespace {

TailTrend trend(const std::vector<double>& t, const std::vector<double>& v, std::size_t windows) {
    TailTrend tr;
    const std::size_t n = v.size();
    double mt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tr.mean += v[i];
        mt += t[i];
    }
    tr.mean /= static_cast<double>(n);
    mt /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (t[i] - mt) * (t[i] - mt);
        sxy += (t[i] - mt) * (v[i] - tr.mean);
    }
    tr.slope = sxx > 0.0 ? sxy / sxx : 0.0;

    const std::size_t per = n / windows;
    tr.magnitude_decreasing = true;
    for (std::size_t w = 0; w < windows; ++w) {
        const std::size_t lo = w * per;
        const std::size_t hi = w + 1 == windows ? n : lo + per;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += std::abs(v[i]);
        tr.window_magnitudes.push_back(acc / static_cast<double>(hi - lo));
        if (w > 0 && !(tr.window_magnitudes[w] < tr.window_magnitudes[w - 1])) tr.magnitude_decreasing = false;
    }
    return tr;
}

}  // namespace

LimitReport limit_estimates(const Trajectory& traj, double tail_fraction, std::size_t windows) {
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) {
        throw DomainError("limit_estimates: tail_fraction must lie in (0, 1)");
    }
    if (windows < 2) throw DomainError("limit_estimates: need at least two windows");
    const auto& s = traj.samples();
    const std::size_t n = s.size();
    const auto m = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
    if (m < 100 || m < windows) {
        throw InsufficientSamples("limit_estimates: tail has " + std::to_string(m) + " samples, need 100");
    }
    const std::size_t first = n - m;

    LimitReport r;
    r.tail_samples = m;
    r.tail_start = s[first].t;
    r.tail_end = s.back().t;

    std::vector<double> t(m);
    std::array<std::vector<double>, 3> du, dy;
    for (auto& v : du) v.resize(m);
    for (auto& v : dy) v.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const TrajectoryPoint& p = s[first + k];
        t[k] = p.t;
        const Vec3 y = maps::diag_to_ratio.apply(p.du);
        for (int i = 0; i < 3; ++i) {
            du[i][k] = p.du[i];
            dy[i][k] = y[i];
        }
    }
    for (int i = 0; i < 3; ++i) {
        r.du[i] = trend(t, du[i], windows);
        r.dy[i] = trend(t, dy[i], windows);
    }
    constexpr double kRoundoff = 64.0 * std::numeric_limits<double>::epsilon();
    for (auto* group : {&r.du, &r.dy}) {
        for (auto& tr : *group) {
            tr.negligible = true;
            for (std::size_t w = 0; w < windows; ++w) {
                if (!(tr.window_magnitudes[w] <= kRoundoff * r.du[0].window_magnitudes[w])) tr.negligible = false;
            }
        }
    }

    r.combinations_increasing = {true, true, true};
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t k = first + 1; k < n; ++k) {
        const Vec3 c0 = monotone_velocity_combinations(s[k - 1].du);
        const Vec3 c1 = monotone_velocity_combinations(s[k].du);
        const double size = 4.0 * std::abs(s[k].du[0]) + std::abs(s[k].du[1]) + std::abs(s[k].du[2]);
        for (int i = 0; i < 3; ++i) {
            if (c1[i] - c0[i] < -8.0 * eps * size) r.combinations_increasing[i] = false;
        }
    }
    r.apex_trending = std::all_of(r.du.begin(), r.du.end(),
                                  [](const TailTrend& tr) { return tr.magnitude_decreasing || tr.negligible; });
    return r;
}

}  // namespace bkl
