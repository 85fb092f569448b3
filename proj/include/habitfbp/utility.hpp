#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "habitfbp/rootfind.hpp"

namespace habitfbp {

// S-shaped utility of the consumption-to-habit ratio c:
//
//   U(c) = gain.value(c - alpha)        for c >  alpha   (concave branch)
//   U(c) = -loss.value(alpha - c)       for c <= alpha   (loss branch)
//
// Both branch functions vanish at 0, are strictly increasing and concave,
// and the gain marginal decays to 0 at infinity.
struct GainBranch {
    std::function<double(double)> value;       // U+(x), x >= 0
    std::function<double(double)> deriv;       // U+'(x) > 0, strictly decreasing
    std::function<double(double)> inv_deriv;   // (U+')^{-1}(phi)
    double marginal_sup = std::numeric_limits<double>::infinity();  // U+'(0+)
};

struct LossBranch {
    std::function<double(double)> value;   // U-(x) on [0, alpha]
    std::function<double(double)> deriv;   // U-'(x)
};

struct UtilitySpec {
    std::string family;
    double alpha = 0.75;
    GainBranch gain;
    LossBranch loss;
    std::map<std::string, double> params;  // family parameters, for reports

    // Whether the loss at the reference stays below alpha * U+'(0+), the
    // condition needed for the two-piece concave envelope. Set analytically
    // by the built-in factories; user-assembled specs should leave it false
    // so that concavify() re-checks numerically.
    bool moderate_loss_ok = false;
    // The gain-branch growth condition is verified analytically for every
    // built-in family; user-assembled specs carry this caveat flag unset.
    bool growth_checked = false;

    double value(double c) const {
        if (c > alpha) return gain.value(c - alpha);
        if (c < 0.0) throw std::invalid_argument("utility: c must be >= 0");
        return -loss.value(alpha - c);
    }
};

// Concavification constants: the envelope is linear with slope phi0 on
// [0, c0] and coincides with U above c0.
struct Envelope {
    double c0;          // kink point, >= alpha
    double phi0;        // U+'(c0 - alpha)
    double u_at_zero;   // U(0) = -U-(alpha)
};

namespace detail {

// Generic numeric inverse of the gain marginal; used when a family has no
// convenient closed form.
inline double numeric_inv_marginal(const std::function<double(double)>& deriv, double phi) {
    if (!(phi > 0.0)) throw std::invalid_argument("inv_deriv: phi must be > 0");
    return invert_decreasing(deriv, phi);
}

inline void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace detail

// U(c) = (c-alpha)^p above alpha, -kappa (alpha-c)^q below.
inline UtilitySpec make_power(double alpha, double p, double q, double kappa) {
    detail::require(alpha > 0.0, "power: alpha must be > 0");
    detail::require(p > 0.0 && p < 1.0, "power: p must be in (0,1)");
    detail::require(q > 0.0 && q <= 1.0, "power: q must be in (0,1]");
    detail::require(kappa >= 1.0, "power: kappa must be >= 1");
    UtilitySpec s;
    s.family = "power";
    s.alpha = alpha;
    s.params = {{"p", p}, {"q", q}, {"kappa", kappa}};
    s.gain.value = [p](double x) { return std::pow(x, p); };
    s.gain.deriv = [p](double x) { return p * std::pow(x, p - 1.0); };
    s.gain.inv_deriv = [p](double phi) { return std::pow(phi / p, 1.0 / (p - 1.0)); };
    s.gain.marginal_sup = std::numeric_limits<double>::infinity();
    s.loss.value = [kappa, q](double x) { return kappa * std::pow(x, q); };
    s.loss.deriv = [kappa, q](double x) { return kappa * q * std::pow(x, q - 1.0); };
    s.moderate_loss_ok = true;   // marginal_sup = +inf
    s.growth_checked = true;
    return s;
}

// Power gain branch extended to p < 0, kept at 0 at the reference by the
// shift ((x+alpha)^p - alpha^p)/p; e.g. p = -1 gives 1/alpha - 1/c on the
// gain side. Loss branch as in make_power.
inline UtilitySpec make_shifted_power(double alpha, double p, double q, double kappa) {
    detail::require(alpha > 0.0, "shifted_power: alpha must be > 0");
    detail::require(p < 0.0, "shifted_power: p must be < 0");
    detail::require(q > 0.0 && q <= 1.0, "shifted_power: q must be in (0,1]");
    detail::require(kappa >= 1.0, "shifted_power: kappa must be >= 1");
    UtilitySpec s;
    s.family = "shifted_power";
    s.alpha = alpha;
    s.params = {{"p", p}, {"q", q}, {"kappa", kappa}};
    s.gain.value = [p, alpha](double x) {
        return (std::pow(x + alpha, p) - std::pow(alpha, p)) / p;
    };
    s.gain.deriv = [p, alpha](double x) { return std::pow(x + alpha, p - 1.0); };
    s.gain.inv_deriv = [p, alpha](double phi) {
        return std::pow(phi, 1.0 / (p - 1.0)) - alpha;
    };
    s.gain.marginal_sup = std::pow(alpha, p - 1.0);
    s.loss.value = [kappa, q](double x) { return kappa * std::pow(x, q); };
    s.loss.deriv = [kappa, q](double x) { return kappa * q * std::pow(x, q - 1.0); };
    s.moderate_loss_ok = kappa * std::pow(alpha, q) <= std::pow(alpha, p);
    s.growth_checked = true;   // bounded above by alpha^p/(-p)
    return s;
}

// Gain 1 - e^{-p x}; loss magnitude kappa (1 - e^{-q x}). The gain marginal
// is capped at p, so the inverse marginal only accepts phi in (0, p].
inline UtilitySpec make_exponential(double alpha, double p, double q, double kappa) {
    detail::require(alpha > 0.0, "exponential: alpha must be > 0");
    detail::require(p > 0.0, "exponential: p must be > 0");
    detail::require(q >= p, "exponential: q must be >= p");
    detail::require(kappa >= 1.0, "exponential: kappa must be >= 1");
    UtilitySpec s;
    s.family = "exponential";
    s.alpha = alpha;
    s.params = {{"p", p}, {"q", q}, {"kappa", kappa}};
    s.gain.value = [p](double x) { return 1.0 - std::exp(-p * x); };
    s.gain.deriv = [p](double x) { return p * std::exp(-p * x); };
    s.gain.inv_deriv = [p](double phi) {
        if (!(phi > 0.0 && phi <= p))
            throw std::invalid_argument("exponential: inverse marginal needs phi in (0, p]");
        return -std::log(phi / p) / p;
    };
    s.gain.marginal_sup = p;
    s.loss.value = [kappa, q](double x) { return kappa * (1.0 - std::exp(-q * x)); };
    s.loss.deriv = [kappa, q](double x) { return kappa * q * std::exp(-q * x); };
    s.moderate_loss_ok = kappa * (1.0 - std::exp(-q * alpha)) <= alpha * p;
    s.growth_checked = true;   // bounded by 1
    return s;
}

namespace detail {

// SAHARA utility with absolute risk aversion gamma / sqrt(x^2 + beta^2),
// before the value shift that pins it to 0 at the origin.
inline double sahara_raw(double x, double gamma, double beta) {
    const double s = std::sqrt(x * x + beta * beta);
    if (gamma == 1.0)
        return 0.5 * std::log(x + s) + x / (2.0 * (x + s));
    return (x + gamma * s) * std::pow(x + s, -gamma) / (1.0 - gamma * gamma);
}

inline double sahara_deriv(double x, double gamma, double beta) {
    return std::pow(x + std::sqrt(x * x + beta * beta), -gamma);
}

}  // namespace detail

// Gain and loss branches from the SAHARA family, each value-shifted so that
// the branch vanishes at 0. The inverse marginal goes through the generic
// safeguarded bisection.
inline UtilitySpec make_sahara(double alpha, double gamma1, double beta1,
                               double gamma2, double beta2) {
    detail::require(alpha > 0.0, "sahara: alpha must be > 0");
    detail::require(gamma1 > 0.0 && gamma2 > 0.0, "sahara: gamma must be > 0");
    detail::require(beta1 > 0.0 && beta2 > 0.0, "sahara: beta must be > 0");
    UtilitySpec s;
    s.family = "sahara";
    s.alpha = alpha;
    s.params = {{"gamma1", gamma1}, {"beta1", beta1}, {"gamma2", gamma2}, {"beta2", beta2}};
    const double shift1 = detail::sahara_raw(0.0, gamma1, beta1);
    const double shift2 = detail::sahara_raw(0.0, gamma2, beta2);
    s.gain.value = [gamma1, beta1, shift1](double x) {
        return detail::sahara_raw(x, gamma1, beta1) - shift1;
    };
    s.gain.deriv = [gamma1, beta1](double x) { return detail::sahara_deriv(x, gamma1, beta1); };
    auto deriv = s.gain.deriv;
    s.gain.inv_deriv = [deriv](double phi) { return detail::numeric_inv_marginal(deriv, phi); };
    s.gain.marginal_sup = std::pow(beta1, -gamma1);
    s.loss.value = [gamma2, beta2, shift2](double x) {
        return detail::sahara_raw(x, gamma2, beta2) - shift2;
    };
    s.loss.deriv = [gamma2, beta2](double x) { return detail::sahara_deriv(x, gamma2, beta2); };
    s.moderate_loss_ok =
        detail::sahara_raw(alpha, gamma2, beta2) - shift2 <= alpha * std::pow(beta1, -gamma1);
    s.growth_checked = true;
    return s;
}

// Three-piece S-shape approximating the constrained-habit utility
// 1/alpha - 1/c: hyperbola above alpha+eps, a power segment gluing it to the
// reference on [alpha, alpha+eps), and loss magnitude 2 kappa sqrt(x).
inline UtilitySpec make_aby22_approx(double alpha, double kappa, double eps) {
    detail::require(alpha > 0.0, "aby22: alpha must be > 0");
    detail::require(kappa > 0.0, "aby22: kappa must be > 0");
    detail::require(eps > 0.0, "aby22: eps must be > 0");
    UtilitySpec s;
    s.family = "aby22_approx";
    s.alpha = alpha;
    s.params = {{"kappa", kappa}, {"eps", eps}};
    const double m = alpha / (alpha + eps);                      // segment exponent in (0,1)
    const double A = std::pow(eps, eps / (alpha + eps)) / (alpha * (alpha + eps));
    const double join_marginal = 1.0 / ((alpha + eps) * (alpha + eps));  // both sides at x=eps
    s.gain.value = [alpha, eps, m, A](double x) {
        if (x >= eps) return 1.0 / alpha - 1.0 / (x + alpha);
        return A * std::pow(x, m);
    };
    s.gain.deriv = [alpha, eps, m, A](double x) {
        if (x >= eps) return 1.0 / ((x + alpha) * (x + alpha));
        return A * m * std::pow(x, m - 1.0);
    };
    s.gain.inv_deriv = [alpha, m, A, join_marginal](double phi) {
        if (phi <= join_marginal) return 1.0 / std::sqrt(phi) - alpha;
        return std::pow(phi / (A * m), 1.0 / (m - 1.0));
    };
    s.gain.marginal_sup = std::numeric_limits<double>::infinity();
    s.loss.value = [kappa](double x) { return 2.0 * kappa * std::sqrt(x); };
    s.loss.deriv = [kappa](double x) { return kappa / std::sqrt(x); };
    s.moderate_loss_ok = true;   // marginal_sup = +inf
    s.growth_checked = true;     // gain bounded by 1/alpha
    return s;
}

// Concave-envelope constants. c0 solves
//   g(c) := c U+'(c-alpha) - U+(c-alpha) - U-(alpha) = 0,  c >= alpha,
// where g is strictly decreasing, by doubling-bracket + bisection.
inline Envelope concavify(const UtilitySpec& spec) {
    const double alpha = spec.alpha;
    const double loss_at_ref = spec.loss.value(alpha);
    const auto g = [&](double c) {
        const double x = c - alpha;
        return c * spec.gain.deriv(x) - spec.gain.value(x) - loss_at_ref;
    };

    Envelope env;
    env.u_at_zero = -loss_at_ref;

    if (std::isfinite(spec.gain.marginal_sup)) {
        const double g_at_ref = alpha * spec.gain.marginal_sup - loss_at_ref;
        if (g_at_ref < -detail::kResTol)
            throw SolverError("concavify: loss at the reference exceeds alpha * U+'(0+); "
                              "no two-piece concave envelope");
        if (g_at_ref <= detail::kResTol) {   // kink sits exactly at the reference
            env.c0 = alpha;
            env.phi0 = spec.gain.marginal_sup;
            return env;
        }
    }

    // g(alpha+) > 0; expand upward until the sign flips.
    double step = std::max(alpha, 1.0) * 1e-3;
    double lo = alpha + step * 1e-6;
    double flo = g(lo);
    if (flo <= 0.0) {   // root hugs the reference
        env.c0 = bisect(g, alpha, lo, g(alpha), flo, 1e-15, 0.0);
        env.phi0 = spec.gain.deriv(env.c0 - alpha);
        return env;
    }
    double hi = alpha + step;
    double fhi = g(hi);
    while (fhi > 0.0) {
        lo = hi;
        flo = fhi;
        step *= 2.0;
        hi = alpha + step;
        if (hi > 1e6 * std::max(alpha, 1.0))
            throw SolverError("concavify: no sign change below 1e6 * alpha");
        fhi = g(hi);
    }
    env.c0 = bisect(g, lo, hi, flo, fhi, 1e-15, 0.0);
    env.phi0 = spec.gain.deriv(env.c0 - alpha);
    return env;
}

// Concave envelope value: linear with slope phi0 up to c0, then U itself.
inline double envelope_value(const UtilitySpec& spec, const Envelope& env, double c) {
    if (c < 0.0) throw std::invalid_argument("envelope_value: c must be >= 0");
    if (c <= env.c0) return env.u_at_zero + env.phi0 * c;
    return spec.gain.value(c - spec.alpha);
}

// Maximizer of U(c) - phi c (and of the concavified version). At the tie
// phi = phi0 the largest maximizer c0 is returned.
inline double chat(const UtilitySpec& spec, const Envelope& env, double phi) {
    if (!(phi > 0.0)) throw std::invalid_argument("chat: phi must be > 0");
    if (phi > env.phi0) return 0.0;
    return spec.alpha + spec.gain.inv_deriv(phi);
}

// Dual kernel G(phi) = U+(I(phi)) - phi (alpha + I(phi)) with I the inverse
// gain marginal; defined for phi in (0, phi0].
inline double dual_kernel(const UtilitySpec& spec, double phi) {
    const double inv = spec.gain.inv_deriv(phi);
    return spec.gain.value(inv) - phi * (spec.alpha + inv);
}

}  // namespace habitfbp
