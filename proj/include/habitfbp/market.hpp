#pragma once

#include <cmath>
#include <stdexcept>

namespace habitfbp {

// Market and preference-rate parameters. `delta` is the effective discount
// rate (subjective rate plus mortality intensity, folded together).
struct MarketParams {
    double r = 0.02;       // riskless rate
    double mu = 0.1;       // excess return of the risky asset
    double sigma = 0.2;    // volatility
    double rho = 1.0;      // habit persistence
    double delta = 0.3;    // effective discount rate

    void validate() const {
        if (!(r >= 0.0)) throw std::invalid_argument("market: r must be >= 0");
        if (!(mu > 0.0)) throw std::invalid_argument("market: mu must be > 0");
        if (!(sigma > 0.0)) throw std::invalid_argument("market: sigma must be > 0");
        if (!(rho > 0.0)) throw std::invalid_argument("market: rho must be > 0");
        if (!(delta > 0.0)) throw std::invalid_argument("market: delta must be > 0");
    }
};

// Roots of k*x^2 - (k + r + rho - delta)*x - delta = 0 with k = mu^2/(2 sigma^2).
// lam is the negative root, lamp the positive one (> 1); gamma = lam/(lam-1).
struct Roots {
    double lam;
    double lamp;
    double gamma;
};

inline Roots solve_roots(const MarketParams& m) {
    m.validate();
    const double k = m.mu * m.mu / (2.0 * m.sigma * m.sigma);
    const double b = k + m.r + m.rho - m.delta;
    const double disc = std::sqrt(b * b + 4.0 * k * m.delta);
    Roots out;
    out.lamp = (b + disc) / (2.0 * k);
    // product of roots is -delta/k; avoids cancellation in b - disc
    out.lam = -m.delta / (k * out.lamp);
    out.gamma = out.lam / (out.lam - 1.0);
    return out;
}

}  // namespace habitfbp
