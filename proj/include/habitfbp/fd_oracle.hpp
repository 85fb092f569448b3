#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "habitfbp/market.hpp"
#include "habitfbp/rootfind.hpp"
#include "habitfbp/utility.hpp"

namespace habitfbp {

struct FdGridConfig {
    double x_hi = 20.0;
    int n = 4001;
    double stretch = 6.0;        // node clustering toward x = 0
    int max_iter = 500;
    double policy_tol = 1e-9;    // sup-norm policy change
    double value_tol = 1e-12;    // fallback stop on relative value change
};

// Discrete solution of the concavified control equation by policy iteration
// on an upwind implicit scheme. A validation oracle, independent of the
// shooting pipeline.
struct FdGrid {
    std::vector<double> xs, v, c_pol, pi_pol;
    int iterations = 0;
    double policy_change = 0.0;
    bool refine_suggested = false;   // a discrete second difference came out >= 0
    bool pi_cap_bound = false;       // the pi clip was active at convergence (interior)
};

namespace detail {

inline void thomas_solve(std::vector<double>& a, std::vector<double>& b,
                         std::vector<double>& c, std::vector<double>& d) {
    // a: sub, b: diag, c: super, d: rhs -> solution written into d
    const size_t n = b.size();
    for (size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

}  // namespace detail

inline FdGrid solve_fd(const MarketParams& m, const UtilitySpec& spec, const Envelope& env,
                       const FdGridConfig& cfg) {
    m.validate();
    if (cfg.n < 16) throw std::invalid_argument("solve_fd: grid too small");
    const int n = cfg.n;
    const double lam = solve_roots(m).lam;
    const double austerity_weight = m.mu * (1.0 - lam) / (m.sigma * m.sigma);

    FdGrid g;
    g.xs.resize(n);
    const double ek = std::expm1(cfg.stretch);
    for (int j = 0; j < n; ++j) {
        const double s = static_cast<double>(j) / (n - 1);
        g.xs[j] = cfg.x_hi * std::expm1(cfg.stretch * s) / ek;
    }

    const double v_at_zero = env.u_at_zero / m.delta;
    g.v.assign(n, v_at_zero);
    g.c_pol.assign(n, 0.0);
    g.pi_pol.assign(n, 0.0);
    // consuming initial guess; an all-austerity start makes v exactly flat
    // and the first derivative-based improvement degenerate
    for (int j = 1; j < n; ++j) {
        g.pi_pol[j] = austerity_weight * g.xs[j];
        g.c_pol[j] = env.c0 + m.delta * g.xs[j];
    }

    std::vector<double> sub(n), diag(n), sup(n), rhs(n);
    std::vector<double> c_new(n), pi_new(n);

    const auto envelope_at = [&](double c) { return envelope_value(spec, env, c); };

    for (int it = 0; it < cfg.max_iter; ++it) {
        // implicit solve with frozen policies
        sub[0] = 0.0;
        diag[0] = 1.0;
        sup[0] = 0.0;
        rhs[0] = v_at_zero;
        for (int j = 1; j < n - 1; ++j) {
            const double x = g.xs[j];
            const double hm = x - g.xs[j - 1];
            const double hp = g.xs[j + 1] - x;
            const double b = (m.r + m.rho) * x + m.mu * g.pi_pol[j] -
                             (1.0 + m.rho * x) * g.c_pol[j];
            const double a = 0.5 * m.sigma * m.sigma * g.pi_pol[j] * g.pi_pol[j];
            const double bp = std::max(b, 0.0), bm = std::max(-b, 0.0);
            const double wl = bm / hm + 2.0 * a / (hm * (hm + hp));
            const double wu = bp / hp + 2.0 * a / (hp * (hm + hp));
            sub[j] = -wl;
            sup[j] = -wu;
            diag[j] = m.delta + wl + wu;
            rhs[j] = envelope_at(g.c_pol[j]);
        }
        {
            // top node: drop diffusion and outward drift (outflow closure)
            const int j = n - 1;
            const double hm = g.xs[j] - g.xs[j - 1];
            const double b = (m.r + m.rho) * g.xs[j] + m.mu * g.pi_pol[j] -
                             (1.0 + m.rho * g.xs[j]) * g.c_pol[j];
            const double bm = std::max(-b, 0.0);
            sub[j] = -bm / hm;
            diag[j] = m.delta + bm / hm;
            sup[j] = 0.0;
            rhs[j] = envelope_at(g.c_pol[j]);
        }
        std::vector<double> va = sub, vb = diag, vc = sup, vd = rhs;
        detail::thomas_solve(va, vb, vc, vd);
        double dv_max = 0.0;
        for (int j = 0; j < n; ++j) {
            dv_max = std::max(dv_max, std::abs(vd[j] - g.v[j]) / (1.0 + std::abs(vd[j])));
            g.v[j] = vd[j];
        }

        // policy improvement from discrete derivatives
        double dpol = 0.0;
        const double c_lid = chat(spec, env, 1e-4 * env.phi0);  // transient guard only
        for (int j = 1; j < n; ++j) {
            double d1, d2;
            if (j < n - 1) {
                const double hm = g.xs[j] - g.xs[j - 1];
                const double hp = g.xs[j + 1] - g.xs[j];
                d1 = (hm * hm * g.v[j + 1] + (hp * hp - hm * hm) * g.v[j] -
                      hp * hp * g.v[j - 1]) /
                     (hm * hp * (hm + hp));
                d2 = 2.0 * (hm * g.v[j + 1] - (hm + hp) * g.v[j] + hp * g.v[j - 1]) /
                     (hm * hp * (hm + hp));
            } else {
                const double hm = g.xs[j] - g.xs[j - 1];
                d1 = (g.v[j] - g.v[j - 1]) / hm;
                d2 = 0.0;
            }
            const double cap = 10.0 * g.xs[j] * austerity_weight;
            double pi;
            if (d2 < 0.0) {
                pi = -(m.mu / (m.sigma * m.sigma)) * d1 / d2;
                pi = std::min(std::max(pi, -cap), cap);
            } else {
                pi = cap;
            }
            const double phi = std::max((1.0 + m.rho * g.xs[j]) * d1, 1e-16);
            double c = std::min(chat(spec, env, phi), c_lid);
            if (j == n - 1) {
                // reflecting top: consume at least enough to stop outward drift
                const double c_reflect =
                    ((m.r + m.rho) * g.xs[j] + m.mu * pi) / (1.0 + m.rho * g.xs[j]);
                c = std::max(c, c_reflect);
            }
            if (it >= 50) {   // damp late sweeps against policy chattering
                pi = 0.5 * (pi + g.pi_pol[j]);
                c = 0.5 * (c + g.c_pol[j]);
            }
            dpol = std::max({dpol, std::abs(pi - g.pi_pol[j]), std::abs(c - g.c_pol[j])});
            pi_new[j] = pi;
            c_new[j] = c;
        }
        pi_new[0] = 0.0;
        c_new[0] = 0.0;
        std::swap(g.pi_pol, pi_new);
        std::swap(g.c_pol, c_new);
        g.iterations = it + 1;
        g.policy_change = dpol;
        if (dpol < cfg.policy_tol || dv_max < cfg.value_tol) break;
        if (it == cfg.max_iter - 1) {
            std::ostringstream os;
            os << "solve_fd: policy iteration did not converge in " << cfg.max_iter
               << " sweeps (last change " << dpol << ")";
            throw SolverError(os.str());
        }
    }

    // convergence-time diagnostics on the interior, excluding the top 5%
    const int j_hi = static_cast<int>(0.95 * n);
    for (int j = 1; j < j_hi; ++j) {
        const double hm = g.xs[j] - g.xs[j - 1];
        const double hp = g.xs[j + 1] - g.xs[j];
        const double d2 = 2.0 * (hm * g.v[j + 1] - (hm + hp) * g.v[j] + hp * g.v[j - 1]) /
                          (hm * hp * (hm + hp));
        if (d2 > 1e-7 * (1.0 + std::abs(g.v[j]))) g.refine_suggested = true;
        const double cap = 10.0 * g.xs[j] * austerity_weight;
        if (g.xs[j] > 0.0 && std::abs(g.pi_pol[j]) >= cap * (1.0 - 1e-12))
            g.pi_cap_bound = true;
    }
    return g;
}

}  // namespace habitfbp
