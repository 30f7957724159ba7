#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "bkl/dynamics.hpp"
#include "bkl/errors.hpp"
#include "bkl/exact_solution.hpp"
#include "bkl/state_charts.hpp"

using namespace bkl;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Max component difference in units of eps times the largest component.
double norm_ulps(const Vec3& a, const Vec3& b) {
    double scale = 0.0, diff = 0.0;
    for (int i = 0; i < 3; ++i) {
        scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
        diff = std::max(diff, std::abs(a[i] - b[i]));
    }
    return scale == 0.0 ? 0.0 : diff / (kEps * scale);
}

// Integer 3x3 helpers independent of RationalMatrix3.
using IMat = std::array<std::array<long long, 3>, 3>;

IMat imul(const IMat& a, const IMat& b) {
    IMat out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
    return out;
}

long long idet(const IMat& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

IMat adjugate(const IMat& m) {
    IMat adj{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            adj[i][j] = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        }
    }
    return adj;
}

IMat as_imat(const RationalMatrix3& m) {
    IMat out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = m.num[i][j];
    return out;
}

}  // namespace

TEST(StateCharts, OriginMapsToOrigin) {
    const LogPoint x{0.0, LogChart{{0, 0, 0}}, Velocity<Chart::log>{{0, 0, 0}}};
    const DiagPoint u = convert<Chart::diag>(x);
    EXPECT_EQ(u.position.value, (Vec3{0, 0, 0}));
    EXPECT_EQ(u.velocity.value, (Vec3{0, 0, 0}));
}

TEST(StateCharts, ExactScaleFactorsToDiagAndRatio) {
    const ScaleFactorPoint p{1.0, ScaleFactors{3, 30, 120}, Velocity<Chart::scale_factors>{{-3, -90, -600}}};
    const DiagPoint u = convert<Chart::diag>(p);
    EXPECT_NEAR(u.position[0], std::log(10800.0) / 3.0, 4 * kEps * 4);
    EXPECT_NEAR(u.position[1], std::log(40.0) / 2.0, 4 * kEps * 2);
    EXPECT_NEAR(u.position[2], std::log(2.5) / 6.0, 8 * kEps);
    EXPECT_NEAR(u.velocity[0], -3.0, 8 * kEps * 3);
    EXPECT_NEAR(u.velocity[1], -2.0, 8 * kEps * 2);
    EXPECT_NEAR(u.velocity[2], 0.0, 8 * kEps * 3);

    const RatioPoint y = convert<Chart::ratio>(p);
    EXPECT_NEAR(y.position[0], std::log(9.0), 4 * kEps * 3);
    EXPECT_NEAR(y.position[1], std::log(10.0), 4 * kEps * 3);
    EXPECT_NEAR(y.position[2], std::log(4.0), 4 * kEps * 3);
}

TEST(StateCharts, LinearMapsAreExactInverses) {
    // Each stored inverse equals adj(m)/det(m), computed here in integers.
    struct Pair {
        RationalMatrix3 fwd, inv;
    };
    for (const Pair& pr : {Pair{maps::diag_to_log, maps::log_to_diag}, Pair{maps::log_to_ratio, maps::ratio_to_log},
                           Pair{CouplingMatrix::M, CouplingMatrix::inverse}}) {
        const IMat f = as_imat(pr.fwd);
        const long long d = idet(f);
        const IMat adj = adjugate(f);
        const IMat inv = as_imat(pr.inv);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                // inv/den == adj/d  <=>  inv * d == adj * den
                EXPECT_EQ(inv[i][j] * d, adj[i][j] * pr.inv.den) << i << "," << j;
            }
        }
        const IMat prod = imul(f, inv);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) EXPECT_EQ(prod[i][j], i == j ? pr.inv.den : 0);
    }
}

TEST(StateCharts, DeterminantsMatchThePaper) {
    EXPECT_EQ(idet(as_imat(maps::diag_to_log)), -6);
    EXPECT_EQ(idet(as_imat(CouplingMatrix::M)), 2);
    EXPECT_EQ(determinant(CouplingMatrix::M), (std::pair<std::int64_t, std::int64_t>{2, 1}));
}

TEST(StateCharts, RoundTripsWithinFourUlp) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-20.0, 20.0);
    double worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
        const LogPoint x{0.0, LogChart{{d(rng), d(rng), d(rng)}}, Velocity<Chart::log>{{d(rng), d(rng), d(rng)}}};
        const LogPoint via_u = convert<Chart::log>(convert<Chart::diag>(x));
        const LogPoint via_y = convert<Chart::log>(convert<Chart::ratio>(x));
        const LogPoint via_uy = convert<Chart::log>(convert<Chart::ratio>(convert<Chart::diag>(x)));
        for (const LogPoint* p : {&via_u, &via_y, &via_uy}) {
            worst = std::max({worst, norm_ulps(p->position.value, x.position.value),
                              norm_ulps(p->velocity.value, x.velocity.value)});
        }
    }
    EXPECT_LE(worst, 4.0);
}

TEST(StateCharts, VolumeCoordinateIsThirdLogOfVolume) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-8.0, 8.0);
    for (int k = 0; k < 1000; ++k) {
        const Vec3 abc{std::exp(d(rng)), std::exp(d(rng)), std::exp(d(rng))};
        const ScaleFactorPoint p{0.0, ScaleFactors{abc}, {}};
        const double u1 = convert<Chart::diag>(p).position[0];
        const double oracle = std::log(abc[0] * abc[1] * abc[2]) / 3.0;
        EXPECT_LE(std::abs(u1 - oracle), 4 * kEps * std::max(1.0, std::abs(oracle)));
    }
}

TEST(StateCharts, ScaleFactorsMustBePositive) {
    EXPECT_THROW(ScaleFactors(1.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(ScaleFactors(1.0, -2.0, 1.0), DomainError);
    EXPECT_THROW(ScaleFactors(1.0, std::nan(""), 1.0), DomainError);
}

TEST(StateCharts, ExpOverflowIsReported) {
    const LogPoint x{0.0, LogChart{{800.0, 0.0, 0.0}}, {}};
    EXPECT_THROW(convert<Chart::scale_factors>(x), OverflowError);
    const LogPoint bad{0.0, LogChart{{std::nan(""), 0.0, 0.0}}, {}};
    EXPECT_THROW(convert<Chart::diag>(bad), DomainError);
}

TEST(StateCharts, RuntimeConvertMatchesTemplate) {
    const DiagPoint u{2.0, DiagChart{{0.3, -1.2, 0.4}}, Velocity<Chart::diag>{{-1.0, 0.5, 0.25}}};
    const AnyPhasePoint y = convert(AnyPhasePoint{u}, Chart::ratio);
    ASSERT_EQ(chart_of(y), Chart::ratio);
    EXPECT_EQ(std::get<RatioPoint>(y), convert<Chart::ratio>(u));
}

TEST(StateCharts, ChartNames) {
    for (Chart c : {Chart::scale_factors, Chart::log, Chart::diag, Chart::ratio}) {
        EXPECT_EQ(parse_chart(chart_name(c)), c);
    }
    EXPECT_EQ(parse_chart("u"), Chart::diag);
    EXPECT_EQ(parse_chart("abc"), Chart::scale_factors);
    EXPECT_FALSE(parse_chart("polar").has_value());
}

TEST(ScaleMap, IdentityAtOne) {
    const DiagPoint u{1.5, DiagChart{{0.3, -1.2, 0.4}}, Velocity<Chart::diag>{{-1.0, 0.5, 0.25}}};
    EXPECT_EQ(scale_map(u, 1.0), u);
}

TEST(ScaleMap, ExactSolutionIsSelfSimilar) {
    // a/2, b/8, c/32 at t = 2 is the exact solution at tau = 2.
    const ScaleFactorPoint p1 = exact_state<Chart::scale_factors>(1.0);
    const ScaleFactorPoint p2 = scale_map(p1, 2.0);
    EXPECT_DOUBLE_EQ(p2.t, 2.0);
    EXPECT_DOUBLE_EQ(p2.position.a(), 1.5);
    EXPECT_DOUBLE_EQ(p2.position.b(), 3.75);
    EXPECT_DOUBLE_EQ(p2.position.c(), 3.75);
    const ScaleFactorPoint e2 = exact_state<Chart::scale_factors>(2.0);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(p2.velocity[i], e2.velocity[i], 1e-14 * std::abs(e2.velocity[i]));

    const DiagPoint u2 = scale_map(exact_state<Chart::diag>(1.0), 2.0);
    const DiagPoint ue = exact_state<Chart::diag>(2.0);
    EXPECT_LE(norm_ulps(u2.position.value, ue.position.value), 8.0);
    EXPECT_LE(norm_ulps(u2.velocity.value, ue.velocity.value), 8.0);
}

TEST(ScaleMap, GroupInverse) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-3.0, 3.0), l(0.1, 10.0);
    for (int k = 0; k < 200; ++k) {
        const RatioPoint y{d(rng), RatioChart{{d(rng), d(rng), d(rng)}}, Velocity<Chart::ratio>{{d(rng), d(rng), d(rng)}}};
        const double lambda = l(rng);
        const RatioPoint back = scale_map(scale_map(y, lambda), 1.0 / lambda);
        EXPECT_NEAR(back.t, y.t, 1e-14 * (1 + std::abs(y.t)));
        EXPECT_LE(norm_ulps(back.position.value, y.position.value), 64.0);
        EXPECT_LE(norm_ulps(back.velocity.value, y.velocity.value), 16.0);
    }
}

TEST(ScaleMap, RejectsNonPositiveLambda) {
    const DiagPoint u{};
    EXPECT_THROW(scale_map(u, 0.0), DomainError);
    EXPECT_THROW(scale_map(u, -1.0), DomainError);
}

TEST(ScaleMap, ConjugatesTheDynamics) {
    // u'' scales by 1/lambda^2 under the map.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(-2.0, 2.0), l(0.2, 5.0);
    for (int k = 0; k < 200; ++k) {
        const DiagPoint u{0.0, DiagChart{{d(rng), d(rng), d(rng)}}, {}};
        const double lambda = l(rng);
        const Vec3 a = rhs_u(u.position).acceleration;
        const Vec3 b = rhs_u(scale_map(u, lambda).position).acceleration;
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(b[i] * lambda * lambda, a[i], 1e-12 * (std::abs(a[0]) * 3 + std::abs(a[1]) + std::abs(a[2])));
        }
    }
}

TEST(TimeReverse, DoubleReversalIsIdentity) {
    const DiagPoint u{1.5, DiagChart{{0.3, -1.2, 0.4}}, Velocity<Chart::diag>{{-1.0, 0.5, 0.25}}};
    EXPECT_EQ(time_reverse(time_reverse(u)), u);
    const DiagPoint r = time_reverse(u);
    EXPECT_EQ(r.t, -1.5);
    EXPECT_EQ(r.position, u.position);
    EXPECT_EQ(r.velocity.value, (Vec3{1.0, -0.5, -0.25}));
}

TEST(TimeReverse, ZeroVelocityOnlyNegatesTime) {
    const LogPoint x{2.0, LogChart{{1, 2, 3}}, {}};
    const LogPoint r = time_reverse(x);
    EXPECT_EQ(r.t, -2.0);
    EXPECT_EQ(r.position, x.position);
    EXPECT_EQ(r.velocity.value, (Vec3{0, 0, 0}));
}

TEST(TimeReverse, PreservesConstraintResidualExactly) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int k = 0; k < 200; ++k) {
        const DiagPoint u{0.0, DiagChart{{d(rng), d(rng), d(rng)}}, Velocity<Chart::diag>{{d(rng), d(rng), d(rng)}}};
        EXPECT_EQ(constraint_residual(u).total, constraint_residual(time_reverse(u)).total);
    }
}
