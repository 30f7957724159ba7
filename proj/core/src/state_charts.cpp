#include "bkl/state_charts.hpp"

#include <cerrno>
#include <limits>

namespace bkl {

std::string_view chart_name(Chart c) {
    switch (c) {
        case Chart::scale_factors:
            return "scale-factors";
        case Chart::log:
            return "log";
        case Chart::diag:
            return "diag";
        case Chart::ratio:
            return "ratio";
    }
    return "unknown";
}

std::optional<Chart> parse_chart(std::string_view name) {
    if (name == "scale-factors" || name == "abc") return Chart::scale_factors;
    if (name == "log" || name == "x") return Chart::log;
    if (name == "diag" || name == "u") return Chart::diag;
    if (name == "ratio" || name == "y") return Chart::ratio;
    return std::nullopt;
}

namespace detail {

void require_finite(double t, const Vec3& pos, const Vec3& vel) {
    if (!std::isfinite(t)) throw DomainError("phase point has non-finite time");
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(pos[i]) || !std::isfinite(vel[i])) {
            throw DomainError("phase point has non-finite components");
        }
    }
}

double checked_exp(double x) {
    const double v = std::exp(x);
    if (!std::isfinite(v)) {
        throw OverflowError("exp overflow converting to scale factors (argument " + std::to_string(x) + ")");
    }
    if (v == 0.0) {
        throw OverflowError("exp underflow converting to scale factors (argument " + std::to_string(x) + ")");
    }
    return v;
}

}  // namespace detail

AnyPhasePoint convert(const AnyPhasePoint& p, Chart target) {
    return std::visit(
        [target](const auto& q) -> AnyPhasePoint {
            switch (target) {
                case Chart::scale_factors:
                    return convert<Chart::scale_factors>(q);
                case Chart::log:
                    return convert<Chart::log>(q);
                case Chart::diag:
                    return convert<Chart::diag>(q);
                case Chart::ratio:
                    return convert<Chart::ratio>(q);
            }
            throw DomainError("unknown chart");
        },
        p);
}

}  // namespace bkl
