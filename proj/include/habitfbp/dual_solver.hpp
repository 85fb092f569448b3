#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

#include "habitfbp/interp.hpp"
#include "habitfbp/market.hpp"
#include "habitfbp/rk45.hpp"
#include "habitfbp/rootfind.hpp"
#include "habitfbp/utility.hpp"

namespace habitfbp {

struct SolverControls {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    double y_min_factor = 1e-8;   // truncation point y_min = factor * phi0
    double shoot_tol = 1e-10;     // bisection bracket width, relative to phi0
    int max_steps = 500000;
    double max_step_frac = 0.1;   // |h| <= frac * y, log-like spacing near 0
};

enum class ExitKind { ThroughPsiZero, ThroughPsiOne, ReachedYMin };

inline const char* to_string(ExitKind k) {
    switch (k) {
        case ExitKind::ThroughPsiZero: return "psi_zero";
        case ExitKind::ThroughPsiOne: return "psi_one";
        case ExitKind::ReachedYMin: return "y_min";
    }
    return "?";
}

// Candidate trajectory integrated backward from ybar; samples are stored in
// ascending y with ys.back() == ybar.
struct Trajectory {
    double ybar = 0.0;
    ExitKind exit = ExitKind::ReachedYMin;
    double y_exit = 0.0;
    std::vector<double> ys, phis, psis;
};

// Affine cap bounding psi along candidate trajectories; equals 1 at
// gamma*phi0 and 0 at phi0.
inline double psi_cap(double ybar, const Envelope& env, const Roots& roots) {
    return (roots.lam - 1.0) * (ybar - env.phi0) / env.phi0;
}

// Coupled first-order system for (phi, psi) in y. Returns false when phi
// leaves the domain of the inverse gain marginal, signalling step rejection.
inline bool ode_rhs(double y, double phi, double psi, const MarketParams& m,
                    const UtilitySpec& spec, double& dphi, double& dpsi) {
    if (!(y > 0.0) || !(phi > 0.0) || !(phi < spec.gain.marginal_sup)) return false;
    const double inv = spec.gain.inv_deriv(phi);
    dphi = phi * (1.0 - psi) / y;
    const double q = 2.0 * m.rho * m.sigma * m.sigma / (m.mu * m.mu);
    dpsi = -q * ((1.0 - psi) / y *
                     (psi / q - inv + (m.r - m.delta) / m.rho + 1.0 - spec.alpha) -
                 (m.r + m.rho) / (m.rho * phi) + m.delta / (m.rho * y));
    return true;
}

namespace detail {

inline constexpr double kPsiBand = 1e-12;

}  // namespace detail

inline Trajectory integrate_candidate(double ybar, const MarketParams& m,
                                      const UtilitySpec& spec, const Envelope& env,
                                      const Roots& roots, const SolverControls& ctl) {
    const double y_min = ctl.y_min_factor * env.phi0;
    if (!(ybar > roots.gamma * env.phi0 && ybar < env.phi0))
        throw std::invalid_argument("integrate_candidate: ybar outside (gamma*phi0, phi0)");

    using Stepper = Dopri5<2>;
    Stepper stepper(
        [&](double y, const Stepper::State& s, Stepper::State& ds) {
            return ode_rhs(y, s[0], s[1], m, spec, ds[0], ds[1]);
        },
        ctl.rel_tol, ctl.abs_tol);

    Trajectory tr;
    tr.ybar = ybar;
    double t = ybar;
    Stepper::State s{env.phi0, psi_cap(ybar, env, roots)};
    tr.ys.push_back(t);
    tr.phis.push_back(s[0]);
    tr.psis.push_back(s[1]);

    // Probes the barrier location between the last interior point and the
    // overshooting one with raw fifth-order substeps.
    const auto refine_exit = [&](double t_in, const Stepper::State& s_in, double t_out,
                                 double barrier) {
        double lo = t_out, hi = t_in;   // lo < hi, state at hi is inside
        Stepper::State probe = s_in;
        for (int it = 0; it < 200 && (hi - lo) > 1e-12 * ybar; ++it) {
            const double mid = 0.5 * (lo + hi);
            Stepper::State sm;
            const bool ok = stepper.step(t_in, s_in, mid - t_in, sm);
            const bool crossed = !ok || (barrier == 0.0 ? sm[1] <= 0.0 : sm[1] >= 1.0);
            if (crossed) {
                lo = mid;
            } else {
                hi = mid;
                probe = sm;
            }
        }
        tr.y_exit = hi;
        if (hi < tr.ys.back()) {
            tr.ys.push_back(hi);
            tr.phis.push_back(probe[0]);
            tr.psis.push_back(probe[1]);
        }
    };

    double h = -std::min(ctl.max_step_frac * t, 0.5 * (ybar - y_min));
    int steps = 0;
    while (t > y_min) {
        if (++steps > ctl.max_steps) {
            std::ostringstream os;
            os << "integrate_candidate: max_steps exceeded at y=" << t << " phi=" << s[0]
               << " psi=" << s[1];
            throw SolverError(os.str());
        }
        double hmag = std::min({std::abs(h), ctl.max_step_frac * t, t - y_min});
        if (hmag < 1e-15 * t) {
            // step underflow against a barrier; classify by proximity
            tr.y_exit = t;
            tr.exit = (s[1] > 0.5) ? ExitKind::ThroughPsiOne : ExitKind::ThroughPsiZero;
            std::reverse(tr.ys.begin(), tr.ys.end());
            std::reverse(tr.phis.begin(), tr.phis.end());
            std::reverse(tr.psis.begin(), tr.psis.end());
            return tr;
        }
        double h_next = 0.0;
        const auto att = stepper.attempt(t, s, -hmag, h_next);
        if (!att.ok) {
            h = h_next;
            continue;
        }
        const double t_new = t - hmag;
        if (att.y[1] >= 1.0 - detail::kPsiBand) {
            tr.exit = ExitKind::ThroughPsiOne;
            refine_exit(t, s, t_new, 1.0);
            std::reverse(tr.ys.begin(), tr.ys.end());
            std::reverse(tr.phis.begin(), tr.phis.end());
            std::reverse(tr.psis.begin(), tr.psis.end());
            return tr;
        }
        if (att.y[1] <= detail::kPsiBand) {
            tr.exit = ExitKind::ThroughPsiZero;
            refine_exit(t, s, t_new, 0.0);
            std::reverse(tr.ys.begin(), tr.ys.end());
            std::reverse(tr.phis.begin(), tr.phis.end());
            std::reverse(tr.psis.begin(), tr.psis.end());
            return tr;
        }
        t = t_new;
        s = att.y;
        tr.ys.push_back(t);
        tr.phis.push_back(s[0]);
        tr.psis.push_back(s[1]);
        h = h_next;
    }

    tr.exit = ExitKind::ReachedYMin;
    tr.y_exit = t;
    std::reverse(tr.ys.begin(), tr.ys.end());
    std::reverse(tr.phis.begin(), tr.phis.end());
    std::reverse(tr.psis.begin(), tr.psis.end());
    return tr;
}

// Full dual solution: the shot free boundary y0, the sampled (phi, psi) grid
// below it with the assembled (u, u', u'') values, and the closed-form branch
// above it. Immutable once built; safe to share across threads.
class DualSolution {
public:
    MarketParams market;
    Roots roots{};
    Envelope env{};
    std::shared_ptr<const UtilitySpec> spec;

    double y0 = 0.0;
    double y_min = 0.0;        // requested truncation point
    double y_reached = 0.0;    // smallest grid y actually attained
    double bracket_width = 0.0;
    ExitKind final_exit = ExitKind::ReachedYMin;

    std::vector<double> ys, phis, psis, us, dus, ddus;

    // Asymptote record at the bottom of the grid, classifying the dichotomy
    // phi(0) > 0 versus psi(0) = 1.
    double phi_at_min = 0.0;
    double psi_at_min = 0.0;
    bool psi_tends_one = false;
    bool phi_stays_positive = false;

    double phi_at(double y) const { return phi_itp_(clamp_y(y)); }
    double psi_at(double y) const { return psi_itp_(clamp_y(y)); }

    struct UVal {
        double u, du, ddu;
    };

    UVal eval(double y) const {
        if (!(y > 0.0)) throw std::invalid_argument("dual eval: y must be > 0");
        UVal o{};
        const double rho = market.rho, delta = market.delta;
        if (y > y0) {
            const double A = (y0 - env.phi0) / (rho * roots.lam);
            const double rel = y / y0;
            o.u = A * std::pow(rel, roots.lam) + env.u_at_zero / delta;
            o.du = (y0 - env.phi0) / (rho * y0) * std::pow(rel, roots.lam - 1.0);
            o.ddu = (roots.lam - 1.0) * (y0 - env.phi0) / (rho * y0 * y0) *
                    std::pow(rel, roots.lam - 2.0);
            return o;
        }
        const double yc = clamp_y(y);
        const double phi = phi_itp_(yc);
        const double psi = psi_itp_(yc);
        const double mu = market.mu, sig = market.sigma;
        o.du = (y - phi) / (rho * y);
        o.ddu = phi * psi / (rho * y * y);
        o.u = (mu * mu / (2.0 * rho * sig * sig) * phi * psi + dual_kernel(*spec, phi) +
               (delta - market.r - rho) / rho * (y - phi)) /
              delta;
        return o;
    }

    void build_interpolants() {
        phi_itp_ = MonotoneCubic(ys, phis);
        psi_itp_ = MonotoneCubic(ys, psis);
    }

private:
    double clamp_y(double y) const { return std::min(std::max(y, y_reached), y0); }

    MonotoneCubic phi_itp_, psi_itp_;
};

// Bisection on the candidate boundary: trajectories leaving through psi=1
// raise the lower bracket, through psi=0 lower the upper one; surviving to
// y_min is accepted outright.
inline DualSolution shoot_y0(const MarketParams& m, std::shared_ptr<const UtilitySpec> spec,
                             const Envelope& env, const SolverControls& ctl) {
    m.validate();
    const Roots roots = solve_roots(m);
    const double lo0 = roots.gamma * env.phi0;

    // Endpoints sit a fixed psi-distance (1e-8) inside the barriers, so the
    // bracket spans nearly the whole admissible interval; y0 can hug either
    // end when the austerity threshold degenerates.
    const double margin = 1e-8 * env.phi0 / (1.0 - roots.lam);
    double lo = lo0 + margin, hi = env.phi0 - margin;
    std::optional<double> accepted;

    Trajectory t_lo = integrate_candidate(lo, m, *spec, env, roots, ctl);
    if (t_lo.exit == ExitKind::ReachedYMin) accepted = lo;
    else if (t_lo.exit != ExitKind::ThroughPsiOne)
        throw SolverError("shoot_y0: lower bracket endpoint did not exit through psi=1; "
                          "parameter regime outside the construction or tolerances too loose");
    Trajectory t_hi = integrate_candidate(hi, m, *spec, env, roots, ctl);
    if (!accepted) {
        if (t_hi.exit == ExitKind::ReachedYMin) accepted = hi;
        else if (t_hi.exit != ExitKind::ThroughPsiZero)
            throw SolverError("shoot_y0: upper bracket endpoint did not exit through psi=0; "
                              "parameter regime outside the construction or tolerances too loose");
    }

    while (!accepted && hi - lo > ctl.shoot_tol * env.phi0) {
        const double mid = 0.5 * (lo + hi);
        const Trajectory t = integrate_candidate(mid, m, *spec, env, roots, ctl);
        if (t.exit == ExitKind::ReachedYMin) {
            accepted = mid;
        } else if (t.exit == ExitKind::ThroughPsiOne) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (!accepted) accepted = 0.5 * (lo + hi);

    // Re-integrate the accepted candidate with tightened tolerances; if it
    // still exits early, probe a few nearby candidates and keep the deepest.
    SolverControls tight = ctl;
    tight.rel_tol = std::max(ctl.rel_tol * 1e-2, 1e-13);
    tight.abs_tol = std::max(ctl.abs_tol * 1e-2, 1e-15);
    Trajectory fin = integrate_candidate(*accepted, m, *spec, env, roots, tight);
    if (fin.exit != ExitKind::ReachedYMin) {
        const double w = hi - lo;
        for (const double frac : {0.25, 0.75, 0.05, 0.95}) {
            const double cand = lo + frac * w;
            Trajectory alt = integrate_candidate(cand, m, *spec, env, roots, tight);
            if (alt.ys.front() < fin.ys.front()) {
                fin = alt;
                *accepted = cand;
            }
            if (fin.exit == ExitKind::ReachedYMin) break;
        }
    }

    DualSolution sol;
    sol.market = m;
    sol.roots = roots;
    sol.env = env;
    sol.spec = std::move(spec);
    sol.y0 = *accepted;
    sol.y_min = ctl.y_min_factor * env.phi0;
    sol.bracket_width = hi - lo;
    sol.final_exit = fin.exit;

    // keep strictly interior samples; the refined barrier point (if any) only
    // informs the exit record
    sol.ys.reserve(fin.ys.size());
    for (size_t i = 0; i < fin.ys.size(); ++i) {
        if (fin.psis[i] <= 0.0 || fin.psis[i] >= 1.0) continue;
        sol.ys.push_back(fin.ys[i]);
        sol.phis.push_back(fin.phis[i]);
        sol.psis.push_back(fin.psis[i]);
    }
    if (sol.ys.size() < 8)
        throw SolverError("shoot_y0: accepted trajectory has too few interior samples");
    sol.y_reached = sol.ys.front();
    sol.phi_at_min = sol.phis.front();
    sol.psi_at_min = sol.psis.front();
    sol.psi_tends_one = sol.psi_at_min > 0.999;
    sol.phi_stays_positive = sol.phi_at_min > 1e-6;

    const double rho = m.rho, delta = m.delta, mu = m.mu, sig = m.sigma;
    const size_t n = sol.ys.size();
    sol.us.resize(n);
    sol.dus.resize(n);
    sol.ddus.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const double y = sol.ys[i], phi = sol.phis[i], psi = sol.psis[i];
        sol.dus[i] = (y - phi) / (rho * y);
        sol.ddus[i] = phi * psi / (rho * y * y);
        sol.us[i] = (mu * mu / (2.0 * rho * sig * sig) * phi * psi +
                     dual_kernel(*sol.spec, phi) + (delta - m.r - rho) / rho * (y - phi)) /
                    delta;
    }
    sol.build_interpolants();
    return sol;
}

}  // namespace habitfbp
