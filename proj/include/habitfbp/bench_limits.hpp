#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "habitfbp/csv.hpp"
#include "habitfbp/primal.hpp"

namespace habitfbp {

// Sampled feedback curves of one solved case, the common currency of the
// limit-case reports and the chart emitters.
struct PolicyCurve {
    std::string label;
    double x0 = 0.0;
    std::vector<double> xs, v, weight, cw;   // weight = pi*/x, cw = c*/x
    std::vector<double> c, pi;
};

inline std::vector<double> geom_grid(double lo, double hi, int n) {
    std::vector<double> xs(n);
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < n; ++i)
        xs[i] = std::exp(l0 + (l1 - l0) * i / (n - 1.0));
    return xs;
}

inline PolicyCurve sample_curve(const SolvedCase& sc, const std::vector<double>& xs,
                                std::string label) {
    PolicyCurve c;
    c.label = std::move(label);
    c.x0 = sc.primal->x0();
    c.xs = xs;
    for (double x : xs) {
        const auto p = sc.primal->eval(x);
        c.v.push_back(p.v);
        c.c.push_back(p.c);
        c.pi.push_back(p.pi);
        c.weight.push_back(p.pi / x);
        c.cw.push_back(p.c / x);
    }
    return c;
}

inline double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size() && i < b.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---------------------------------------------------------------------------
// Vanishing reference point and habit persistence: the policies approach the
// classical constant-weight / constant-consumption-rate benchmark.

struct MertonLimitRow {
    double alpha = 0.0, rho = 0.0, x0 = 0.0;
    double weight_gap = 0.0;   // sup |pi*/x - weight_ref| on the window, x > 2 x0
    double cw_gap = 0.0;       // sup |c*/x - gamma_m|
};

struct MertonLimitReport {
    double p = 0.0;
    double weight_ref = 0.0, gamma_m_ref = 0.0;
    double window_lo = 0.5, window_hi = 5.0;
    std::vector<MertonLimitRow> rows;
    std::vector<PolicyCurve> curves;
};

inline MertonLimitReport merton_limit(MarketParams market, double p, double q, double kappa,
                                      const std::vector<double>& alphas,
                                      const std::vector<double>& rhos,
                                      const SolverControls& ctl = {}) {
    if (alphas.size() != rhos.size())
        throw std::invalid_argument("merton_limit: alpha/rho sequences must match");
    MertonLimitReport rep;
    rep.p = p;
    const auto xs = geom_grid(rep.window_lo, rep.window_hi, 200);
    for (size_t i = 0; i < alphas.size(); ++i) {
        market.rho = rhos[i];
        const MertonBenchmark bench = merton(market, p);
        rep.weight_ref = bench.weight;
        rep.gamma_m_ref = bench.gamma_m;
        const SolvedCase sc = solve_case(market, make_power(alphas[i], p, q, kappa), ctl);
        PolicyCurve curve = sample_curve(sc, xs, "alpha=rho=" + fmt_double(alphas[i]));
        MertonLimitRow row;
        row.alpha = alphas[i];
        row.rho = rhos[i];
        row.x0 = sc.primal->x0();
        for (size_t j = 0; j < xs.size(); ++j) {
            if (xs[j] <= 2.0 * row.x0) continue;
            row.weight_gap = std::max(row.weight_gap, std::abs(curve.weight[j] - bench.weight));
            row.cw_gap = std::max(row.cw_gap, std::abs(curve.cw[j] - bench.gamma_m));
        }
        rep.rows.push_back(row);
        rep.curves.push_back(std::move(curve));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// rho -> 0: the model approaches the fixed-reference S-shaped problem. No
// machine-readable external reference exists, so the report records
// self-convergence of the policy curves along the rho sequence.

struct FixedReferenceReport {
    std::vector<double> rhos, x0s;
    std::vector<double> weight_gaps, c_gaps;   // between successive runs
    std::vector<PolicyCurve> curves;
    double c_at_probe = 0.0;   // c*(x_probe) for the smallest rho
    double x_probe = 5.0;
};

inline FixedReferenceReport fixed_reference_limit(const std::vector<double>& rhos,
                                                  const SolverControls& ctl = {}) {
    MarketParams market;
    market.r = 0.01;
    market.mu = 0.04;
    market.sigma = 0.2;
    market.delta = 0.07;
    FixedReferenceReport rep;
    const auto xs = geom_grid(0.25, 20.0, 200);
    for (double rho : rhos) {
        market.rho = rho;
        const SolvedCase sc =
            solve_case(market, make_power(1.0, 0.68, 0.68, 2.25), ctl);
        rep.rhos.push_back(rho);
        rep.x0s.push_back(sc.primal->x0());
        rep.curves.push_back(sample_curve(sc, xs, "rho=" + fmt_double(rho)));
    }
    for (size_t i = 0; i + 1 < rep.curves.size(); ++i) {
        rep.weight_gaps.push_back(sup_abs_diff(rep.curves[i].weight, rep.curves[i + 1].weight));
        rep.c_gaps.push_back(sup_abs_diff(rep.curves[i].c, rep.curves[i + 1].c));
    }
    const auto& last = rep.curves.back();
    // nearest grid point to the probe abscissa
    size_t jbest = 0;
    for (size_t j = 1; j < last.xs.size(); ++j)
        if (std::abs(last.xs[j] - rep.x_probe) < std::abs(last.xs[jbest] - rep.x_probe)) jbest = j;
    rep.x_probe = last.xs[jbest];
    rep.c_at_probe = last.c[jbest];
    return rep;
}

// ---------------------------------------------------------------------------
// alpha -> 0 with a p < 0 gain branch: the loss region vanishes and the
// model approaches the plain multiplicative-habit problem.

struct RogersLimitReport {
    std::vector<double> alphas, x0s;
    std::vector<double> weight_gaps, cw_gaps;
    std::vector<PolicyCurve> curves;
    double merton_weight = 0.0, merton_gamma_m = 0.0;
};

inline RogersLimitReport rogers_limit(const std::vector<double>& alphas,
                                      const SolverControls& ctl = {}) {
    MarketParams market;
    market.r = 0.05;
    market.mu = 0.09;
    market.sigma = 0.35;
    market.delta = 0.02;
    market.rho = 1.0;
    const double p = -1.0;
    const MertonBenchmark bench = merton(market, p);
    RogersLimitReport rep;
    rep.merton_weight = bench.weight;
    rep.merton_gamma_m = bench.gamma_m;
    const auto xs = geom_grid(0.25, 10.0, 200);
    for (double alpha : alphas) {
        const SolvedCase sc =
            solve_case(market, make_shifted_power(alpha, p, 0.5, 2.0), ctl);
        rep.alphas.push_back(alpha);
        rep.x0s.push_back(sc.primal->x0());
        rep.curves.push_back(sample_curve(sc, xs, "alpha=" + fmt_double(alpha)));
    }
    for (size_t i = 0; i + 1 < rep.curves.size(); ++i) {
        // compare above the larger austerity threshold of the pair
        const double cut = 1.1 * std::max(rep.x0s[i], rep.x0s[i + 1]);
        double wg = 0.0, cg = 0.0;
        for (size_t j = 0; j < xs.size(); ++j) {
            if (xs[j] <= cut) continue;
            wg = std::max(wg, std::abs(rep.curves[i].weight[j] - rep.curves[i + 1].weight[j]));
            cg = std::max(cg, std::abs(rep.curves[i].cw[j] - rep.curves[i + 1].cw[j]));
        }
        rep.weight_gaps.push_back(wg);
        rep.cw_gaps.push_back(cg);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// kappa -> inf, eps -> 0 in the three-piece family: the policies approach the
// constrained-habit model, whose no-bankruptcy bound is
// x_lower = alpha / (r + rho (1 - alpha)); the portfolio weight collapses
// near that bound.

struct Aby22LimitReport {
    double x_lower = 0.0;
    std::vector<double> kappas, epsilons, x0s;
    std::vector<double> weight_at_bound;        // pi*(x_lower)/x_lower per run
    std::vector<double> weight_gaps;            // successive sup gaps for x >= x_lower
    std::vector<PolicyCurve> curves;
    double power_kappa100_min_weight = -1.0;    // min weight in a +-5% window, power family
};

inline Aby22LimitReport aby22_limit(const std::vector<double>& kappas,
                                    const std::vector<double>& epsilons,
                                    bool include_power_kappa100 = true,
                                    const SolverControls& ctl = {}) {
    if (kappas.size() != epsilons.size())
        throw std::invalid_argument("aby22_limit: kappa/eps sequences must match");
    MarketParams market;   // base-case market
    const double alpha = 0.75;
    Aby22LimitReport rep;
    rep.x_lower = alpha / (market.r + market.rho * (1.0 - alpha));
    const auto xs = geom_grid(rep.x_lower, 3.0 * rep.x_lower, 200);
    for (size_t i = 0; i < kappas.size(); ++i) {
        const SolvedCase sc =
            solve_case(market, make_aby22_approx(alpha, kappas[i], epsilons[i]), ctl);
        rep.kappas.push_back(kappas[i]);
        rep.epsilons.push_back(epsilons[i]);
        rep.x0s.push_back(sc.primal->x0());
        rep.weight_at_bound.push_back(sc.primal->policy_pi(rep.x_lower) / rep.x_lower);
        rep.curves.push_back(sample_curve(
            sc, xs, "kappa=" + fmt_double(kappas[i]) + " eps=" + fmt_double(epsilons[i])));
    }
    for (size_t i = 0; i + 1 < rep.curves.size(); ++i)
        rep.weight_gaps.push_back(
            sup_abs_diff(rep.curves[i].weight, rep.curves[i + 1].weight));

    if (include_power_kappa100) {
        const SolvedCase sc = solve_case(market, make_power(alpha, 0.2, 0.5, 100.0), ctl);
        double mn = 1e300;
        for (double x : geom_grid(0.95 * rep.x_lower, 1.05 * rep.x_lower, 101))
            mn = std::min(mn, sc.primal->policy_pi(x) / x);
        rep.power_kappa100_min_weight = mn;
    }
    return rep;
}

}  // namespace habitfbp
