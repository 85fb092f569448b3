#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "habitfbp/dual_solver.hpp"

namespace habitfbp {

// Feedback quantities at one wealth-to-habit ratio x.
struct PolicyPoint {
    double x = 0.0;
    double v = 0.0;        // value
    double dv = 0.0;       // marginal value (the dual variable y)
    double c = 0.0;        // consumption-to-habit feedback
    double pi = 0.0;       // investment-to-habit feedback
    bool clamped = false;  // query beyond the resolved grid, tail clamp used
};

// Primal side of the solved problem: the austerity threshold x0 and
// evaluators for v, v', c*, pi* built on the dual grid. Immutable; queries
// are pure and thread-safe.
class PrimalSolution {
public:
    explicit PrimalSolution(std::shared_ptr<const DualSolution> dual)
        : dual_(std::move(dual)) {
        const auto& d = *dual_;
        x0_ = (d.env.phi0 - d.y0) / (d.market.rho * d.y0);
        x_max_ = -d.eval(d.y_reached).du;
    }

    double x0() const { return x0_; }
    double x_max() const { return x_max_; }
    const DualSolution& dual() const { return *dual_; }

    double value(double x) const { return eval(x).v; }
    double marginal(double x) const { return eval(x).dv; }
    double policy_c(double x) const { return eval(x).c; }
    double policy_pi(double x) const { return eval(x).pi; }

    // v''(x) = -1 / u''(v'(x))
    double second(double x) const {
        const double y = marginal(x);
        return -1.0 / dual_->eval(y).ddu;
    }

    // two-state value through the ratio identity
    double value2d(double wealth, double habit) const {
        if (!(habit > 0.0)) throw std::invalid_argument("value2d: habit must be > 0");
        return value(wealth / habit);
    }

    PolicyPoint eval(double x) const {
        if (!(x > 0.0)) throw std::invalid_argument("primal eval: x must be > 0");
        const auto& d = *dual_;
        const double rho = d.market.rho, mu = d.market.mu, sig = d.market.sigma;
        PolicyPoint p;
        p.x = x;
        if (x < x0_) {
            // austerity branch: closed form carried over from the linear dual branch
            const double lam = d.roots.lam;
            const double B = (1.0 - lam) * (d.y0 - d.env.phi0) / (rho * lam);
            const double rel = x / x0_;
            p.v = B * std::pow(rel, lam / (lam - 1.0)) + d.env.u_at_zero / d.market.delta;
            p.dv = d.y0 * std::pow(rel, 1.0 / (lam - 1.0));
            p.c = 0.0;
            p.pi = mu * (1.0 - lam) / (sig * sig) * x;
            return p;
        }
        double y;
        if (x > x_max_) {
            // linear tail with v' frozen at the deepest resolved dual point
            p.clamped = true;
            y = d.y_reached;
            p.v = d.eval(y).u + y * x;
            p.dv = y;
        } else {
            y = invert_marginal(x);
            p.dv = y;
            p.v = d.eval(y).u + x * y;
        }
        const double phi = d.phi_at(y);
        const double psi = d.psi_at(y);
        p.c = d.spec->alpha + d.spec->gain.inv_deriv(phi);
        p.pi = mu / (sig * sig * rho) * (1.0 + rho * x) * psi;
        return p;
    }

private:
    // Solves -u'(y) = x on the dual grid: u' is strictly increasing, so the
    // grid is bisected first, then a few guarded Newton steps polish the root
    // inside the bracketing interval.
    double invert_marginal(double x) const {
        const auto& d = *dual_;
        // dus ascend with y; -du descends. Find the bracketing interval.
        size_t lo = 0, hi = d.ys.size() - 1;
        while (hi - lo > 1) {
            const size_t mid = (lo + hi) / 2;
            if (-d.dus[mid] >= x) lo = mid;
            else hi = mid;
        }
        double ylo = d.ys[lo], yhi = d.ys[hi];
        double y = 0.5 * (ylo + yhi);
        for (int it = 0; it < 60; ++it) {
            const auto e = d.eval(y);
            const double f = -e.du - x;      // decreasing in y
            if (std::abs(f) < 1e-14 * (1.0 + x)) break;
            if (f > 0.0) ylo = y;
            else yhi = y;
            const double step = -f / (-e.ddu);   // d(-u')/dy = -u''
            double ynew = y + step;
            if (!(ynew > ylo && ynew < yhi)) ynew = 0.5 * (ylo + yhi);
            if (std::abs(ynew - y) < 1e-15 * y) {
                y = ynew;
                break;
            }
            y = ynew;
        }
        return y;
    }

    std::shared_ptr<const DualSolution> dual_;
    double x0_ = 0.0;
    double x_max_ = 0.0;
};

// Closed-form infinite-horizon benchmark with power utility c^p/p: constant
// portfolio weight and consumption-to-wealth ratio.
struct MertonBenchmark {
    double p = 0.0;
    double weight = 0.0;   // mu / ((1-p) sigma^2)
    double gamma_m = 0.0;  // consumption-to-wealth constant
    bool well_posed = true;

    // value of the relative problem with utility c^p (our normalization)
    double value_relative(double x) const {
        return std::pow(gamma_m, p - 1.0) * std::pow(x, p);
    }
};

inline MertonBenchmark merton(const MarketParams& m, double p) {
    if (!(p < 1.0) || p == 0.0)
        throw std::invalid_argument("merton: p must satisfy p < 1, p != 0");
    MertonBenchmark b;
    b.p = p;
    b.weight = m.mu / ((1.0 - p) * m.sigma * m.sigma);
    b.gamma_m = (m.delta - p * (m.r + m.mu * m.mu / (2.0 * (1.0 - p) * m.sigma * m.sigma))) /
                (1.0 - p);
    b.well_posed = b.gamma_m > 0.0;
    return b;
}

// Whole pipeline for one parameter set: envelope, shot dual, primal.
struct SolvedCase {
    std::shared_ptr<const UtilitySpec> spec;
    Envelope env{};
    std::shared_ptr<const DualSolution> dual;
    std::shared_ptr<const PrimalSolution> primal;
};

inline SolvedCase solve_case(const MarketParams& m, UtilitySpec spec,
                             const SolverControls& ctl = {}) {
    SolvedCase sc;
    sc.spec = std::make_shared<const UtilitySpec>(std::move(spec));
    sc.env = concavify(*sc.spec);
    sc.dual = std::make_shared<const DualSolution>(shoot_y0(m, sc.spec, sc.env, ctl));
    sc.primal = std::make_shared<const PrimalSolution>(sc.dual);
    return sc;
}

}  // namespace habitfbp
