#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace habitfbp {

// Thrown when a numeric routine cannot produce a trustworthy result
// (bracket expansion exhausted, iteration budget hit, bad regime).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline constexpr double kArgTol = 1e-12;   // absolute tolerance on the argument
inline constexpr double kResTol = 1e-10;   // tolerance on the residual
}

// Bisection for f(x)=0 on [lo,hi] with f(lo), f(hi) of opposite sign.
// Stops when the bracket is below arg_tol*max(1,|x|) or |f| < res_tol.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double flo, double fhi,
                     double arg_tol = detail::kArgTol,
                     double res_tol = detail::kResTol) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw SolverError("bisect: endpoints do not bracket a root");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;   // bracket at double resolution
        const double fm = f(mid);
        if (std::abs(fm) < res_tol || (hi - lo) < arg_tol * std::max(1.0, std::abs(mid)))
            return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return 0.5 * (lo + hi);
}

// Inverts a strictly decreasing g on (0,inf): returns x with g(x)=target.
// Initial bracket [1e-12, 1], expanded geometrically on either side; gives up
// after max_doublings expansions per side.
inline double invert_decreasing(const std::function<double(double)>& g, double target,
                                int max_doublings = 200) {
    double lo = 1e-12, hi = 1.0;
    double glo = g(lo), ghi = g(hi);
    int n = 0;
    while (glo < target) {          // need g(lo) >= target
        lo *= 0.5;
        glo = g(lo);
        if (++n > max_doublings)
            throw SolverError("invert_decreasing: lower bracket expansion failed");
    }
    n = 0;
    while (ghi > target) {          // need g(hi) <= target
        hi *= 2.0;
        ghi = g(hi);
        if (++n > max_doublings)
            throw SolverError("invert_decreasing: upper bracket expansion failed");
    }
    // g decreasing: g(x)-target changes sign from + (at lo) to - (at hi)
    return bisect([&](double x) { return g(x) - target; }, lo, hi,
                  glo - target, ghi - target);
}

}  // namespace habitfbp
