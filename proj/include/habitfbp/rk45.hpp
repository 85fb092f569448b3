#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

namespace habitfbp {

// Dormand-Prince 5(4) embedded pair with PI step-size control. The right-hand
// side may veto an evaluation (domain violation) by returning false; the
// driver treats that as a failed attempt and shrinks the step.
template <std::size_t N>
class Dopri5 {
public:
    using State = std::array<double, N>;
    // f(t, y, dydt) -> evaluable?
    using Rhs = std::function<bool(double, const State&, State&)>;

    struct Attempt {
        bool ok = false;        // stages evaluable and error acceptable
        bool evaluable = true;  // false if the RHS vetoed a stage
        State y{};
        double err = 0.0;       // scaled error norm of the attempted step
    };

    Dopri5(Rhs f, double rel_tol, double abs_tol)
        : f_(std::move(f)), rel_tol_(rel_tol), abs_tol_(abs_tol) {}

    // One raw step of size h from (t, y); no error control, 5th-order result.
    bool step(double t, const State& y, double h, State& out) const {
        double err;
        return stages(t, y, h, out, err);
    }

    // Attempt a step of size h; on success also proposes the next step size,
    // on failure proposes a retry size. |h| never grows by more than fac_max.
    Attempt attempt(double t, const State& y, double h, double& h_next) {
        Attempt a;
        a.evaluable = stages(t, y, h, a.y, a.err);
        if (!a.evaluable) {
            a.ok = false;
            h_next = 0.5 * h;
            return a;
        }
        const double err = std::max(a.err, 1e-30);
        // PI controller (order 5: exponent 1/5 with a stabilizing memory term)
        double fac = safety_ * std::pow(err, -0.7 / 5.0) * std::pow(err_old_, 0.4 / 5.0);
        fac = std::min(fac_max_, std::max(fac_min_, fac));
        if (err <= 1.0) {
            a.ok = true;
            err_old_ = err;
            h_next = h * fac;
        } else {
            a.ok = false;
            h_next = h * std::min(1.0, fac);
        }
        return a;
    }

    void reset_controller() { err_old_ = 1.0; }

private:
    bool stages(double t, const State& y, double h, State& out, double& err) const {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                                a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        State k1, k2, k3, k4, k5, k6, k7, tmp;
        if (!f_(t, y, k1)) return false;
        comb(tmp, y, h, a21, k1);
        if (!f_(t + c2 * h, tmp, k2)) return false;
        comb(tmp, y, h, a31, k1, a32, k2);
        if (!f_(t + c3 * h, tmp, k3)) return false;
        comb(tmp, y, h, a41, k1, a42, k2, a43, k3);
        if (!f_(t + c4 * h, tmp, k4)) return false;
        comb(tmp, y, h, a51, k1, a52, k2, a53, k3, a54, k4);
        if (!f_(t + c5 * h, tmp, k5)) return false;
        comb(tmp, y, h, a61, k1, a62, k2, a63, k3, a64, k4, a65, k5);
        if (!f_(t + h, tmp, k6)) return false;
        comb(out, y, h, b1, k1, 0.0, k2, b3, k3, b4, k4, b5, k5, b6, k6);
        if (!f_(t + h, out, k7)) return false;  // FSAL stage, used for the error estimate

        err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            const double sc = abs_tol_ + rel_tol_ * std::max(std::abs(y[i]), std::abs(out[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / static_cast<double>(N));
        return true;
    }

    static void comb(State& out, const State& y, double h, double a1, const State& k1) {
        for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h * a1 * k1[i];
    }
    static void comb(State& out, const State& y, double h, double a1, const State& k1,
                     double a2, const State& k2) {
        for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h * (a1 * k1[i] + a2 * k2[i]);
    }
    static void comb(State& out, const State& y, double h, double a1, const State& k1,
                     double a2, const State& k2, double a3, const State& k3) {
        for (std::size_t i = 0; i < N; ++i)
            out[i] = y[i] + h * (a1 * k1[i] + a2 * k2[i] + a3 * k3[i]);
    }
    static void comb(State& out, const State& y, double h, double a1, const State& k1,
                     double a2, const State& k2, double a3, const State& k3, double a4,
                     const State& k4) {
        for (std::size_t i = 0; i < N; ++i)
            out[i] = y[i] + h * (a1 * k1[i] + a2 * k2[i] + a3 * k3[i] + a4 * k4[i]);
    }
    static void comb(State& out, const State& y, double h, double a1, const State& k1,
                     double a2, const State& k2, double a3, const State& k3, double a4,
                     const State& k4, double a5, const State& k5) {
        for (std::size_t i = 0; i < N; ++i)
            out[i] = y[i] + h * (a1 * k1[i] + a2 * k2[i] + a3 * k3[i] + a4 * k4[i] + a5 * k5[i]);
    }
    static void comb(State& out, const State& y, double h, double a1, const State& k1,
                     double a2, const State& k2, double a3, const State& k3, double a4,
                     const State& k4, double a5, const State& k5, double a6, const State& k6) {
        for (std::size_t i = 0; i < N; ++i)
            out[i] = y[i] + h * (a1 * k1[i] + a2 * k2[i] + a3 * k3[i] + a4 * k4[i] +
                                 a5 * k5[i] + a6 * k6[i]);
    }

    Rhs f_;
    double rel_tol_, abs_tol_;
    double err_old_ = 1.0;
    static constexpr double safety_ = 0.9, fac_min_ = 0.2, fac_max_ = 6.0;
};

}  // namespace habitfbp
