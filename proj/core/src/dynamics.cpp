#include "bkl/dynamics.hpp"

#include <cmath>
#include <string>

namespace bkl {

namespace {

Vec3 exponentials_of_ratio(const Vec3& y, double guard) {
    Vec3 e{};
    for (int i = 0; i < 3; ++i) {
        if (!(y[i] <= guard)) {
            throw OverflowError("exponent argument y" + std::to_string(i + 1) + " = " + std::to_string(y[i]) +
                                " exceeds guard " + std::to_string(guard));
        }
        e[i] = std::exp(y[i]);
    }
    return e;
}

}  // namespace

template <Chart C>
Vec3 exponentials(const Position<C>& pos, double guard) {
    if constexpr (C == Chart::scale_factors) {
        const double a = pos.a();
        const Vec3 e{a * a, pos.b() / a, pos.c() / pos.b()};
        for (double v : e) {
            if (!std::isfinite(v)) throw OverflowError("scale-factor ratios overflow");
        }
        return e;
    } else {
        return exponentials_of_ratio(linear_map<C, Chart::ratio>().apply(pos.value), guard);
    }
}

template Vec3 exponentials(const Position<Chart::scale_factors>&, double);
template Vec3 exponentials(const Position<Chart::log>&, double);
template Vec3 exponentials(const Position<Chart::diag>&, double);
template Vec3 exponentials(const Position<Chart::ratio>&, double);

RhsResult rhs_u(const DiagChart& u, double guard) {
    const Vec3 e = exponentials(u, guard);
    const double q = e[0];
    const double r = e[1];
    const double s = e[2];
    // e^{u2} cosh 3u3 = (r + s)/2, e^{u2} sinh 3u3 = (r - s)/2
    return RhsResult{{q / 3.0, q - 0.5 * (r + s), q / 3.0 - 0.5 * (r - s)}, e};
}

RhsResult rhs_y(const RatioChart& y, double guard) {
    const Vec3 e = exponentials(y, guard);
    return RhsResult{CouplingMatrix::M.apply(e), e};
}

namespace {

RhsResult log_chart_rhs(const Vec3& e) {
    const double q = e[0];
    const double r = e[1];
    const double s = e[2];
    return RhsResult{{r - q, q - r + s, q - s}, e};
}

}  // namespace

RhsResult rhs_x(const LogChart& x, double guard) {
    return log_chart_rhs(exponentials(x, guard));
}

RhsResult rhs_abc(const ScaleFactors& sf) {
    return log_chart_rhs(exponentials(sf));
}

template <Chart C>
double kinetic_energy(const Velocity<C>& v) {
    static_assert(is_log_type(C), "kinetic form is defined on log-type charts");
    const Vec3& w = v.value;
    if constexpr (C == Chart::diag) {
        return 3.0 * w[0] * w[0] - w[1] * w[1] - 3.0 * w[2] * w[2];
    } else if constexpr (C == Chart::log) {
        return w[0] * w[1] + w[1] * w[2] + w[2] * w[0];
    } else {
        return 0.75 * w[0] * w[0] + 2.0 * w[0] * w[1] + w[1] * w[1] + w[1] * w[2] + w[2] * w[0];
    }
}

template double kinetic_energy(const Velocity<Chart::log>&);
template double kinetic_energy(const Velocity<Chart::diag>&);
template double kinetic_energy(const Velocity<Chart::ratio>&);

template <Chart C>
EnergySplit constraint_residual(const PhasePoint<C>& p, double guard) {
    if constexpr (C == Chart::scale_factors) {
        return constraint_residual(convert<Chart::log>(p), guard);
    } else {
        const Vec3 e = exponentials(p.position, guard);
        EnergySplit out;
        out.kinetic = kinetic_energy(p.velocity);
        out.potential = -(e[0] + e[1] + e[2]);
        out.total = out.kinetic + out.potential;
        return out;
    }
}

template EnergySplit constraint_residual(const ScaleFactorPoint&, double);
template EnergySplit constraint_residual(const LogPoint&, double);
template EnergySplit constraint_residual(const DiagPoint&, double);
template EnergySplit constraint_residual(const RatioPoint&, double);

EquationResidual acceleration_identity(const DiagPoint& p, double guard) {
    const Vec3 dd = rhs_u(p.position, guard).acceleration;
    const Vec3& v = p.velocity.value;
    const double t1 = 2.0 * dd[1];
    const double t2 = -9.0 * dd[0];
    const double t3 = 3.0 * v[0] * v[0];
    const double t4 = -v[1] * v[1];
    const double t5 = -3.0 * v[2] * v[2];
    return EquationResidual{t1 + t2 + t3 + t4 + t5,
                            std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4) + std::abs(t5)};
}

template <Chart C>
EquationResidual third_equation_residual(const PhasePoint<C>& p, double tolerance) {
    const LogPoint lp = convert<Chart::log>(p);
    const Vec3 e = exponentials(lp.position);
    const double q = e[0];
    const double r = e[1];
    const double s = e[2];
    const double va = lp.velocity[0];
    const double vb = lp.velocity[1];
    const double vc = lp.velocity[2];

    const double denom = va + vb;
    const double size = std::abs(va) + std::abs(vb) + std::abs(vc);
    if (!(std::abs(denom) > tolerance * size)) {
        throw IndeterminateError("third equation is indeterminate: d ln a/dt + d ln b/dt vanishes");
    }

    const double acc_a = r - q;
    const double acc_b = q - r + s;
    // dH/dt = acc_a (vb + vc) + acc_b (va + vc) + acc_c (va + vb)
    //         - (2 va q + (vb - va) r + (vc - vb) s) = 0
    const std::array<double, 5> terms{2.0 * va * q, (vb - va) * r, (vc - vb) * s, -acc_a * (vb + vc),
                                      -acc_b * (va + vc)};
    double numerator = 0.0;
    double magnitude = 0.0;
    for (double t : terms) {
        numerator += t;
        magnitude += std::abs(t);
    }
    const double implied = numerator / denom;
    const double direct = q - s;
    return EquationResidual{implied - direct, magnitude / std::abs(denom) + std::abs(q) + std::abs(s)};
}

template EquationResidual third_equation_residual(const ScaleFactorPoint&, double);
template EquationResidual third_equation_residual(const LogPoint&, double);
template EquationResidual third_equation_residual(const DiagPoint&, double);
template EquationResidual third_equation_residual(const RatioPoint&, double);

std::array<Vec3, 3> rhs_u_jacobian(const DiagChart& u, double guard) {
    const Vec3 e = exponentials(u, guard);
    const double q = e[0];
    const double r = e[1];
    const double s = e[2];
    // dq/du = q (2,-2,-2), dr/du = r (0,1,3), ds/du = s (0,1,-3)
    return {{
        {2.0 * q / 3.0, -2.0 * q / 3.0, -2.0 * q / 3.0},
        {2.0 * q, -2.0 * q - 0.5 * (r + s), -2.0 * q - 1.5 * (r - s)},
        {2.0 * q / 3.0, -2.0 * q / 3.0 - 0.5 * (r - s), -2.0 * q / 3.0 - 1.5 * (r + s)},
    }};
}

}  // namespace bkl
