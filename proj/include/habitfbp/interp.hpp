#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace habitfbp {

// Shape-preserving cubic Hermite interpolant with Fritsch-Carlson slopes.
// Monotone data yields a monotone interpolant; non-monotone data is handled
// without overshoot across local extrema.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw std::invalid_argument("MonotoneCubic: need >= 2 matching nodes");
        for (size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw std::invalid_argument("MonotoneCubic: x must be strictly increasing");

        std::vector<double> h(n - 1), s(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            s[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        d_.assign(n, 0.0);
        if (n == 2) {
            d_[0] = d_[1] = s[0];
        } else {
            // interior slopes: weighted harmonic mean when secants agree in
            // sign, zero at local extrema
            for (size_t i = 1; i + 1 < n; ++i) {
                if (s[i - 1] * s[i] <= 0.0) {
                    d_[i] = 0.0;
                } else {
                    const double w1 = 2.0 * h[i] + h[i - 1];
                    const double w2 = h[i] + 2.0 * h[i - 1];
                    d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
                }
            }
            d_[0] = edge_slope(h[0], h[1], s[0], s[1]);
            d_[n - 1] = edge_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
        }
    }

    double operator()(double xq) const { return eval(xq).first; }

    double deriv(double xq) const { return eval(xq).second; }

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }

private:
    static double edge_slope(double h0, double h1, double s0, double s1) {
        // one-sided three-point estimate, limited as in Fritsch-Carlson
        double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (d * s0 <= 0.0) return 0.0;
        if (s0 * s1 < 0.0 && std::abs(d) > 3.0 * std::abs(s0)) return 3.0 * s0;
        return d;
    }

    std::pair<double, double> eval(double xq) const {
        // clamp to the data range; callers handle extrapolation policy
        if (xq <= x_.front()) xq = x_.front();
        if (xq >= x_.back()) xq = x_.back();
        const size_t i = interval(xq);
        const double h = x_[i + 1] - x_[i];
        const double t = (xq - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        const double v = h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
        const double dh00 = (6.0 * t2 - 6.0 * t) / h;
        const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
        const double dh11 = 3.0 * t2 - 2.0 * t;
        const double dv = dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
        return {v, dv};
    }

    size_t interval(double xq) const {
        const auto it = std::upper_bound(x_.begin(), x_.end(), xq);
        size_t i = static_cast<size_t>(it - x_.begin());
        if (i == 0) return 0;
        if (i >= x_.size()) return x_.size() - 2;
        return i - 1;
    }

    std::vector<double> x_, y_, d_;
};

}  // namespace habitfbp
