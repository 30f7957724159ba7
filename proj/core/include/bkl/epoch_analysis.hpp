#pragma once

// Kasner exponents, quasi-Kasner epochs between reflections, and tail
// estimates of the velocity limits.

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "bkl/integrator.hpp"
#include "bkl/state_charts.hpp"

namespace bkl {

/// Exponents normalised so that p1 + p2 + p3 = 1.
class KasnerTriple {
public:
    /// Throws IndeterminateError when |sum| <= tolerance * (|x1'| + |x2'| + |x3'|).
    explicit KasnerTriple(const Velocity<Chart::log>& dx, double tolerance = 1e-12);

    double operator[](std::size_t i) const { return p_[i]; }
    const Vec3& values() const { return p_; }
    double sum() const { return p_[0] + p_[1] + p_[2]; }
    /// |p1^2 + p2^2 + p3^2 - 1|
    double quadratic_residual() const;
    int negative_count() const;

private:
    Vec3 p_{};
};

KasnerTriple kasner_exponents(const Velocity<Chart::log>& dx, double tolerance = 1e-12);

/// E_k / (3 u1'^2): 0 on the cone surface, 1 at the axis.
double cone_closeness(const TrajectoryPoint& p);

struct EpochRecord {
    double t_start = 0.0;
    double t_end = 0.0;
    Vec3 p{};
    double kasner_quadratic_residual = 0.0;
    double epsilon_entry = 0.0;
    double epsilon_exit = 0.0;
    double mean_closeness = 0.0;
    std::size_t samples = 0;
    int negative_exponents = 0;
};

inline constexpr double kDefaultEpochDelta = 0.01;

/// Between consecutive reflections, the longest run of samples with
/// cone-closeness below delta; p from the time-averaged log velocity.
/// Runs that reach the bracketing reflections take their times.
std::vector<EpochRecord> epoch_segments(const Trajectory& traj, const std::vector<ReflectionEvent>& events,
                                        double delta = kDefaultEpochDelta);

struct TailTrend {
    double mean = 0.0;
    double slope = 0.0;                ///< least-squares d/dt over the tail
    std::vector<double> window_magnitudes;  ///< mean of |value| per window
    bool magnitude_decreasing = false;      ///< strictly, window over window
    /// Every window magnitude is at round-off level relative to |u1'|.
    bool negligible = false;
};

struct LimitReport {
    std::size_t tail_samples = 0;
    double tail_start = 0.0;
    double tail_end = 0.0;
    std::array<TailTrend, 3> du;  ///< estimates of g = lim u'
    std::array<TailTrend, 3> dy;  ///< estimates of gamma = lim y'
    /// u1', 4u1'-u2'-u3', 2u1'-u2'+u3' nondecreasing over the tail.
    std::array<bool, 3> combinations_increasing{};
    bool apex_trending = false;

    Vec3 g() const { return {du[0].mean, du[1].mean, du[2].mean}; }
    Vec3 gamma() const { return {dy[0].mean, dy[1].mean, dy[2].mean}; }
    std::string_view classification() const {
        return apex_trending ? "apex-trending" : "undetermined at this horizon";
    }
    /// |g2| <= sqrt3 |g1| and |g3| <= |g1|, with `slack` absolute allowance.
    bool cone_bounds_hold(double slack = 0.0) const;
};

inline constexpr std::size_t kDefaultTailWindows = 3;

/// Throws DomainError for tail_fraction outside (0, 1) and
/// InsufficientSamples when the tail has fewer than 100 samples.
LimitReport limit_estimates(const Trajectory& traj, double tail_fraction,
                            std::size_t windows = kDefaultTailWindows);

}  // namespace bkl
