#pragma once

// Coordinate charts for the reduced BKL system and the exact transforms
// between them.
//
//   scale_factors : (a, b, c), all strictly positive
//   log           : x_i = ln of the scale factors
//   diag          : u, the chart in which the kinetic form is diagonal;
//                   u1 = ln(abc)/3, u2 = ln(c/a)/2, u3 = ln(b^2/ac)/6
//   ratio         : y1 = ln a^2, y2 = ln(b/a), y3 = ln(c/b)
//
// The three log-type charts are related by small rational matrices which are
// stored exactly; only exp/log (to and from scale_factors) round.

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "bkl/errors.hpp"

namespace bkl {

using Vec3 = std::array<double, 3>;

enum class Chart { scale_factors, log, diag, ratio };

inline constexpr bool is_log_type(Chart c) { return c != Chart::scale_factors; }

std::string_view chart_name(Chart c);
/// Accepts the canonical names plus the short aliases abc, x, u, y.
std::optional<Chart> parse_chart(std::string_view name);

/// Exact 3x3 rational matrix: entries num[i][j] / den.
struct RationalMatrix3 {
    std::array<std::array<std::int64_t, 3>, 3> num{};
    std::int64_t den = 1;

    constexpr Vec3 apply(const Vec3& v) const {
        Vec3 out{};
        for (int i = 0; i < 3; ++i) {
            double acc = 0.0;
            for (int j = 0; j < 3; ++j) {
                acc += static_cast<double>(num[i][j]) * v[j];
            }
            out[i] = den == 1 ? acc : acc / static_cast<double>(den);
        }
        return out;
    }

    constexpr bool operator==(const RationalMatrix3&) const = default;
};

namespace detail {

constexpr std::int64_t abs64(std::int64_t v) { return v < 0 ? -v : v; }

constexpr RationalMatrix3 reduce(RationalMatrix3 m) {
    std::int64_t g = abs64(m.den);
    for (const auto& row : m.num) {
        for (auto v : row) {
            g = std::gcd(g, abs64(v));
        }
    }
    if (g > 1) {
        for (auto& row : m.num) {
            for (auto& v : row) {
                v /= g;
            }
        }
        m.den /= g;
    }
    if (m.den < 0) {
        for (auto& row : m.num) {
            for (auto& v : row) {
                v = -v;
            }
        }
        m.den = -m.den;
    }
    return m;
}

}  // namespace detail

constexpr RationalMatrix3 operator*(const RationalMatrix3& a, const RationalMatrix3& b) {
    RationalMatrix3 out;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            std::int64_t acc = 0;
            for (int k = 0; k < 3; ++k) {
                acc += a.num[i][k] * b.num[k][j];
            }
            out.num[i][j] = acc;
        }
    }
    out.den = a.den * b.den;
    return detail::reduce(out);
}

/// Determinant as an exact fraction (numerator, denominator).
constexpr std::pair<std::int64_t, std::int64_t> determinant(const RationalMatrix3& m) {
    const auto& n = m.num;
    const std::int64_t d = n[0][0] * (n[1][1] * n[2][2] - n[1][2] * n[2][1]) -
                           n[0][1] * (n[1][0] * n[2][2] - n[1][2] * n[2][0]) +
                           n[0][2] * (n[1][0] * n[2][1] - n[1][1] * n[2][0]);
    const std::int64_t den = m.den * m.den * m.den;
    const std::int64_t g = std::gcd(detail::abs64(d), den);
    return {d / g, den / g};
}

inline constexpr RationalMatrix3 kIdentity3{{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, 1};

namespace maps {

// x = diag_to_log * u
inline constexpr RationalMatrix3 diag_to_log{{{{1, -1, -1}, {1, 0, 2}, {1, 1, -1}}}, 1};
inline constexpr RationalMatrix3 log_to_diag{{{{2, 2, 2}, {-3, 0, 3}, {-1, 2, -1}}}, 6};
// y = log_to_ratio * x
inline constexpr RationalMatrix3 log_to_ratio{{{{2, 0, 0}, {-1, 1, 0}, {0, -1, 1}}}, 1};
inline constexpr RationalMatrix3 ratio_to_log{{{{1, 0, 0}, {1, 2, 0}, {1, 2, 2}}}, 2};

inline constexpr RationalMatrix3 diag_to_ratio = log_to_ratio * diag_to_log;
inline constexpr RationalMatrix3 ratio_to_diag = log_to_diag * ratio_to_log;

static_assert(diag_to_log * log_to_diag == kIdentity3);
static_assert(log_to_ratio * ratio_to_log == kIdentity3);
static_assert(diag_to_ratio * ratio_to_diag == kIdentity3);
static_assert(determinant(diag_to_log) == std::pair<std::int64_t, std::int64_t>{-6, 1});
static_assert(diag_to_ratio ==
              RationalMatrix3{{{{2, -2, -2}, {0, 1, 3}, {0, 1, -3}}}, 1});

}  // namespace maps

/// The constant matrix of the ratio-chart equations, y'' = M exp(y), stored
/// together with its exact inverse.
struct CouplingMatrix {
    static constexpr RationalMatrix3 M{{{{-2, 2, 0}, {2, -2, 1}, {0, 1, -2}}}, 1};
    static constexpr RationalMatrix3 inverse{{{{3, 4, 2}, {4, 4, 2}, {2, 2, 0}}}, 2};
};

static_assert(determinant(CouplingMatrix::M) == std::pair<std::int64_t, std::int64_t>{2, 1});
static_assert(CouplingMatrix::M * CouplingMatrix::inverse == kIdentity3);
static_assert(CouplingMatrix::inverse * CouplingMatrix::M == kIdentity3);

/// Linear map taking log-type chart `From` coordinates to chart `To`.
template <Chart From, Chart To>
constexpr RationalMatrix3 linear_map() {
    static_assert(is_log_type(From) && is_log_type(To), "scale_factors is not a linear chart");
    if constexpr (From == To) {
        return kIdentity3;
    } else if constexpr (From == Chart::diag && To == Chart::log) {
        return maps::diag_to_log;
    } else if constexpr (From == Chart::log && To == Chart::diag) {
        return maps::log_to_diag;
    } else if constexpr (From == Chart::log && To == Chart::ratio) {
        return maps::log_to_ratio;
    } else if constexpr (From == Chart::ratio && To == Chart::log) {
        return maps::ratio_to_log;
    } else if constexpr (From == Chart::diag && To == Chart::ratio) {
        return maps::diag_to_ratio;
    } else {
        return maps::ratio_to_diag;
    }
}

/// Chart-tagged coordinate triple. Mixing charts does not compile.
template <Chart C>
struct Position {
    Vec3 value{};

    constexpr Position() = default;
    constexpr explicit Position(const Vec3& v) : value(v) {}
    constexpr double operator[](std::size_t i) const { return value[i]; }
    constexpr bool operator==(const Position&) const = default;
};

/// Scale factors carry the positivity invariant.
template <>
struct Position<Chart::scale_factors> {
    Vec3 value{1.0, 1.0, 1.0};

    Position() = default;
    explicit Position(const Vec3& v) : value(v) {
        for (double s : v) {
            if (!(s > 0.0) || !std::isfinite(s)) {
                throw DomainError("scale factors must be finite and strictly positive");
            }
        }
    }
    Position(double a, double b, double c) : Position(Vec3{a, b, c}) {}

    double a() const { return value[0]; }
    double b() const { return value[1]; }
    double c() const { return value[2]; }
    double operator[](std::size_t i) const { return value[i]; }
    bool operator==(const Position&) const = default;
};

template <Chart C>
struct Velocity {
    Vec3 value{};

    constexpr Velocity() = default;
    constexpr explicit Velocity(const Vec3& v) : value(v) {}
    constexpr double operator[](std::size_t i) const { return value[i]; }
    constexpr bool operator==(const Velocity&) const = default;
};

using ScaleFactors = Position<Chart::scale_factors>;
using LogChart = Position<Chart::log>;
using DiagChart = Position<Chart::diag>;
using RatioChart = Position<Chart::ratio>;

/// Time (rescaled) plus position and velocity in one chart.
template <Chart C>
struct PhasePoint {
    static constexpr Chart chart = C;

    double t = 0.0;
    Position<C> position;
    Velocity<C> velocity;

    bool operator==(const PhasePoint&) const = default;
};

using ScaleFactorPoint = PhasePoint<Chart::scale_factors>;
using LogPoint = PhasePoint<Chart::log>;
using DiagPoint = PhasePoint<Chart::diag>;
using RatioPoint = PhasePoint<Chart::ratio>;

using AnyPhasePoint = std::variant<ScaleFactorPoint, LogPoint, DiagPoint, RatioPoint>;

inline Chart chart_of(const AnyPhasePoint& p) {
    return std::visit([](const auto& q) { return std::decay_t<decltype(q)>::chart; }, p);
}

namespace detail {

void require_finite(double t, const Vec3& pos, const Vec3& vel);
double checked_exp(double x);

inline LogPoint to_log(const ScaleFactorPoint& p) {
    const Vec3& s = p.position.value;
    const Vec3& ds = p.velocity.value;
    return LogPoint{p.t, LogChart{{std::log(s[0]), std::log(s[1]), std::log(s[2])}},
                    Velocity<Chart::log>{{ds[0] / s[0], ds[1] / s[1], ds[2] / s[2]}}};
}

inline ScaleFactorPoint from_log(const LogPoint& p) {
    const Vec3& x = p.position.value;
    const Vec3& dx = p.velocity.value;
    const Vec3 s{checked_exp(x[0]), checked_exp(x[1]), checked_exp(x[2])};
    return ScaleFactorPoint{p.t, ScaleFactors{s},
                            Velocity<Chart::scale_factors>{{s[0] * dx[0], s[1] * dx[1], s[2] * dx[2]}}};
}

}  // namespace detail

/// Maps a phase point into chart `To`; positions and velocities move together.
/// Throws DomainError on non-finite input, OverflowError if exp overflows.
template <Chart To, Chart From>
PhasePoint<To> convert(const PhasePoint<From>& p) {
    detail::require_finite(p.t, p.position.value, p.velocity.value);
    if constexpr (To == From) {
        return p;
    } else if constexpr (From == Chart::scale_factors) {
        return convert<To>(detail::to_log(p));
    } else if constexpr (To == Chart::scale_factors) {
        return detail::from_log(convert<Chart::log>(p));
    } else {
        constexpr RationalMatrix3 m = linear_map<From, To>();
        return PhasePoint<To>{p.t, Position<To>{m.apply(p.position.value)},
                              Velocity<To>{m.apply(p.velocity.value)}};
    }
}

AnyPhasePoint convert(const AnyPhasePoint& p, Chart target);

/// Image of a log-chart offset (1, 3, 5) * ln(lambda) in chart C.
template <Chart C>
constexpr Vec3 scaling_weights() {
    return linear_map<Chart::log, C>().apply(Vec3{1.0, 3.0, 5.0});
}

/// Scaling symmetry t' = lt, a' = a/l, b' = b/l^3, c' = c/l^5.
template <Chart C>
PhasePoint<C> scale_map(const PhasePoint<C>& p, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw DomainError("scale_map: lambda must be positive and finite");
    }
    PhasePoint<C> out = p;
    out.t = lambda * p.t;
    if constexpr (C == Chart::scale_factors) {
        constexpr std::array<int, 3> power{1, 3, 5};
        Vec3 s{};
        Vec3 ds{};
        for (int i = 0; i < 3; ++i) {
            s[i] = p.position.value[i] / std::pow(lambda, power[i]);
            ds[i] = p.velocity.value[i] / std::pow(lambda, power[i] + 1);
        }
        out.position = ScaleFactors{s};
        out.velocity = Velocity<C>{ds};
    } else {
        const double log_lambda = std::log(lambda);
        constexpr Vec3 w = scaling_weights<C>();
        for (int i = 0; i < 3; ++i) {
            out.position.value[i] = p.position.value[i] - w[i] * log_lambda;
            out.velocity.value[i] = p.velocity.value[i] / lambda;
        }
    }
    return out;
}

/// t -> -t with velocities negated; positions unchanged.
template <Chart C>
constexpr PhasePoint<C> time_reverse(const PhasePoint<C>& p) {
    PhasePoint<C> out = p;
    out.t = -p.t;
    for (auto& v : out.velocity.value) {
        v = -v;
    }
    return out;
}

}  // namespace bkl
