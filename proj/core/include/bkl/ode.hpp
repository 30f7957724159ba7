#pragma once

// Dormand-Prince 5(4) embedded pair with a PI step-size controller and the
// Hairer-Norsett-Wanner starting-step heuristic. Generic over the state size
// so that both the BKL system and its variational equations share it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "bkl/errors.hpp"

namespace bkl::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct StepControl {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double safety = 0.9;
    double fac_min = 0.2;   ///< smallest step shrink factor
    double fac_max = 10.0;  ///< largest step growth factor
    double beta = 0.04;     ///< PI memory exponent
    double h_max = std::numeric_limits<double>::infinity();
    int max_rejections = 200;  ///< consecutive rejections before giving up
};

class StepSizeUnderflow : public Error {
public:
    using Error::Error;
};

/// Error scale sc_i = abs_tol + rel_tol * max(|y0_i|, |y1_i|); the accepted
/// local error satisfies |err_i| <= sc_i for every component.
struct ComponentScale {
    double rel_tol;
    double abs_tol;

    template <std::size_t N>
    void operator()(const State<N>& y0, const State<N>& y1, State<N>& sc) const {
        for (std::size_t i = 0; i < N; ++i) {
            sc[i] = abs_tol + rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        }
    }
};

template <std::size_t N>
struct Step {
    double t0 = 0.0;
    double t1 = 0.0;
    State<N> y0{};
    State<N> y1{};
    State<N> f0{};
    State<N> f1{};
    double error_norm = 0.0;  ///< max_i |err_i| / sc_i of the accepted step
    int rejected = 0;
};

/// Cubic Hermite interpolant of one accepted step.
template <std::size_t N>
State<N> hermite(const Step<N>& s, double t) {
    const double h = s.t1 - s.t0;
    const double th = (t - s.t0) / h;
    const double th2 = th * th;
    const double th3 = th2 * th;
    const double h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
    const double h10 = th3 - 2.0 * th2 + th;
    const double h01 = -2.0 * th3 + 3.0 * th2;
    const double h11 = th3 - th2;
    State<N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = h00 * s.y0[i] + h10 * h * s.f0[i] + h01 * s.y1[i] + h11 * h * s.f1[i];
    }
    return out;
}

/// Rhs: void(double t, const State<N>& y, State<N>& dydt).
template <std::size_t N, class Rhs, class Scale = ComponentScale>
class DormandPrince45 {
public:
    DormandPrince45(Rhs rhs, StepControl control, Scale scale)
        : rhs_(std::move(rhs)), control_(control), scale_(scale) {}

    DormandPrince45(Rhs rhs, StepControl control)
        : DormandPrince45(std::move(rhs), control, Scale{control.rel_tol, control.abs_tol}) {}

    /// Sets the state and picks the first step size for integration towards t_end.
    void initialize(double t, const State<N>& y, double t_end) {
        t_ = t;
        y_ = y;
        rhs_(t_, y_, f_);
        h_ = initial_step(t_end - t);
        fac_old_ = 1e-4;
        last_rejected_ = false;
    }

    /// Replaces the state at the current time (derivative is re-evaluated).
    void reset_state(const State<N>& y) {
        y_ = y;
        rhs_(t_, y_, f_);
    }

    double t() const { return t_; }
    double h() const { return h_; }
    const State<N>& y() const { return y_; }
    const State<N>& dydt() const { return f_; }

    /// Advances by one accepted step without passing t_limit.
    Step<N> step(double t_limit) {
        Step<N> out;
        out.t0 = t_;
        out.y0 = y_;
        out.f0 = f_;
        const double expo = 0.2 - control_.beta * 0.75;
        int rejected = 0;
        for (;;) {
            double h = std::min({h_, control_.h_max, t_limit - t_});
            const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_));
            if (h < h_floor && t_limit - t_ > h_floor) {
                throw StepSizeUnderflow("step size underflow at t = " + std::to_string(t_));
            }
            State<N> y_new{};
            State<N> f_new{};
            double err = 0.0;
            bool overflowed = false;
            try {
                err = attempt(h, y_new, f_new);
            } catch (const OverflowError&) {
                // A trial stage left the admissible region; only give up once
                // the step can no longer shrink.
                if (h <= 1e3 * h_floor || rejected >= control_.max_rejections) throw;
                overflowed = true;
            }
            if (!overflowed && err <= 1.0) {
                const double fac11 = std::pow(std::max(err, 1e-300), expo);
                double fac = fac11 / std::pow(fac_old_, control_.beta);
                fac = std::clamp(fac / control_.safety, 1.0 / control_.fac_max, 1.0 / control_.fac_min);
                double h_new = h / fac;
                if (last_rejected_) h_new = std::min(h_new, h);
                fac_old_ = std::max(err, 1e-4);
                last_rejected_ = false;
                t_ = (h == t_limit - t_) ? t_limit : t_ + h;
                y_ = y_new;
                f_ = f_new;
                h_ = h_new;
                out.t1 = t_;
                out.y1 = y_;
                out.f1 = f_;
                out.error_norm = err;
                out.rejected = rejected;
                return out;
            }
            ++rejected;
            if (rejected > control_.max_rejections) {
                throw StepSizeUnderflow("too many consecutive step rejections at t = " + std::to_string(t_));
            }
            last_rejected_ = true;
            if (overflowed) {
                h_ = 0.25 * h;
            } else {
                const double fac11 = std::pow(err, expo);
                h_ = h / std::min(1.0 / control_.fac_min, fac11 / control_.safety);
            }
        }
    }

private:
    double attempt(double h, State<N>& y_new, State<N>& f_new) {
        constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
        constexpr double a21 = 1.0 / 5.0;
        constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
        constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                         a54 = -212.0 / 729.0;
        constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                         a65 = -5103.0 / 18656.0;
        constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                         b6 = 11.0 / 84.0;
        constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                         e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

        const State<N>& k1 = f_;
        State<N> k2{}, k3{}, k4{}, k5{}, k6{}, tmp{};
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * a21 * k1[i];
        rhs_(t_ + c2 * h, tmp, k2);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs_(t_ + c3 * h, tmp, k3);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs_(t_ + c4 * h, tmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs_(t_ + c5 * h, tmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs_(t_ + h, tmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            y_new[i] = y_[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs_(t_ + h, y_new, f_new);  // FSAL

        State<N> sc{};
        scale_(y_, y_new, sc);
        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * f_new[i]);
            err = std::max(err, std::abs(e) / sc[i]);
        }
        if (!std::isfinite(err)) throw OverflowError("non-finite error estimate");
        return err;
    }

    double initial_step(double span) const {
        State<N> sc{};
        scale_(y_, y_, sc);
        auto rms = [&](const State<N>& v) {
            double acc = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double w = v[i] / sc[i];
                acc += w * w;
            }
            return std::sqrt(acc / static_cast<double>(N));
        };
        const double d0 = rms(y_);
        const double d1 = rms(f_);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min({h0, span, control_.h_max});
        State<N> y1{};
        State<N> f1{};
        for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + h0 * f_[i];
        rhs_(t_ + h0, y1, f1);
        State<N> df{};
        for (std::size_t i = 0; i < N; ++i) df[i] = f1[i] - f_[i];
        const double d2 = rms(df) / h0;
        const double dmax = std::max(d1, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        return std::min({100.0 * h0, h1, span, control_.h_max});
    }

    Rhs rhs_;
    StepControl control_;
    Scale scale_;
    double t_ = 0.0;
    double h_ = 0.0;
    State<N> y_{};
    State<N> f_{};
    double fac_old_ = 1e-4;
    bool last_rejected_ = false;
};

}  // namespace bkl::ode
