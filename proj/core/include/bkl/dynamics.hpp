#pragma once

// Right-hand sides of the reduced BKL equations in every chart, the first
// integral H = E_k + E_p, and the algebraic identities between them.
//
// All charts evaluate the same three exponentials
//   q = exp(y1) = a^2,  r = exp(y2) = b/a,  s = exp(y3) = c/b
// so that the right-hand sides agree bit-for-bit in their exponential terms.

#include <array>

#include "bkl/state_charts.hpp"

namespace bkl {

/// Largest exponent argument accepted before an evaluation is aborted.
inline constexpr double kDefaultExponentGuard = 700.0;

struct EnergySplit {
    double kinetic = 0.0;
    double potential = 0.0;
    double total = 0.0;
};

struct RhsResult {
    Vec3 acceleration{};  ///< second derivatives of the chart coordinates
    Vec3 exponentials{};  ///< (q, r, s)
};

/// A residual together with the magnitude it should be compared against.
struct EquationResidual {
    double residual = 0.0;
    double scale = 0.0;

    double relative() const { return scale > 0.0 ? std::abs(residual) / scale : std::abs(residual); }
};

/// (q, r, s) at a position; throws OverflowError if any ratio-chart
/// coordinate exceeds `guard`.
template <Chart C>
Vec3 exponentials(const Position<C>& pos, double guard = kDefaultExponentGuard);

RhsResult rhs_u(const DiagChart& u, double guard = kDefaultExponentGuard);
RhsResult rhs_y(const RatioChart& y, double guard = kDefaultExponentGuard);
RhsResult rhs_x(const LogChart& x, double guard = kDefaultExponentGuard);
/// Second derivatives of (ln a, ln b, ln c) evaluated from the scale factors
/// directly, without passing through logarithms.
RhsResult rhs_abc(const ScaleFactors& sf);

template <Chart C>
RhsResult rhs(const Position<C>& pos, double guard = kDefaultExponentGuard) {
    if constexpr (C == Chart::diag) {
        return rhs_u(pos, guard);
    } else if constexpr (C == Chart::ratio) {
        return rhs_y(pos, guard);
    } else if constexpr (C == Chart::log) {
        return rhs_x(pos, guard);
    } else {
        return rhs_abc(pos);
    }
}

/// Kinetic quadratic form in the chart's own velocities (log-type charts).
template <Chart C>
double kinetic_energy(const Velocity<C>& v);

/// Kinetic, potential and total H. H vanishes on physical states.
template <Chart C>
EnergySplit constraint_residual(const PhasePoint<C>& p, double guard = kDefaultExponentGuard);

/// 2 u2'' - 9 u1'' + 3 u1'^2 - u2'^2 - 3 u3'^2, which equals H identically.
/// The scale is the sum of the magnitudes of the five terms.
EquationResidual acceleration_identity(const DiagPoint& p, double guard = kDefaultExponentGuard);

inline double acceleration_identity_residual(const DiagPoint& p, double guard = kDefaultExponentGuard) {
    return acceleration_identity(p, guard).residual;
}

/// Residual of the third scale-factor equation after reconstructing
/// d^2 ln c/dt^2 from the first two equations and dH/dt = 0. Throws
/// IndeterminateError when d ln a/dt + d ln b/dt vanishes within `tolerance`
/// relative to the size of the log velocities.
template <Chart C>
EquationResidual third_equation_residual(const PhasePoint<C>& p, double tolerance = 1e-9);

/// Left-hand sides of 3u1'' = exp y1, 4u1''-u2''-u3'' = exp y2,
/// 2u1''-u2''+u3'' = exp y3.
constexpr Vec3 first_integral_combinations(const Vec3& ddu) {
    return {3.0 * ddu[0], 4.0 * ddu[0] - ddu[1] - ddu[2], 2.0 * ddu[0] - ddu[1] + ddu[2]};
}

/// Same combinations applied to velocities; each is nondecreasing in t.
constexpr Vec3 monotone_velocity_combinations(const Vec3& du) {
    return {du[0], 4.0 * du[0] - du[1] - du[2], 2.0 * du[0] - du[1] + du[2]};
}

/// d(u'')/du, row i = gradient of the i-th acceleration.
std::array<Vec3, 3> rhs_u_jacobian(const DiagChart& u, double guard = kDefaultExponentGuard);

/// dE_k/dt in the diag chart.
inline double kinetic_energy_rate(const Vec3& du, const Vec3& ddu) {
    return 6.0 * du[0] * ddu[0] - 2.0 * du[1] * ddu[1] - 6.0 * du[2] * ddu[2];
}

}  // namespace bkl
