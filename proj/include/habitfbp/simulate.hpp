#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "habitfbp/primal.hpp"
#include "habitfbp/rng.hpp"

namespace habitfbp {

struct SimConfig {
    double x_init = 2.0;
    double h_init = 1.0;
    double horizon = 10.0;
    double dt = 1e-2;
    int n_paths = 1000;
    std::uint64_t seed = 1;
    std::string scheme = "log-euler";
    int store_stride = 0;   // 0: picked so that <= ~400 points are kept per path
    int rng_substeps = 1;   // Brownian increments drawn on a dt/substeps grid
    int jobs = 1;
    bool zero_vol = false;  // test hook: switches the diffusion off

    void validate() const {
        if (!(x_init > 0.0)) throw std::invalid_argument("sim: x_init must be > 0");
        if (!(h_init > 0.0)) throw std::invalid_argument("sim: h_init must be > 0");
        if (!(dt > 0.0)) throw std::invalid_argument("sim: dt must be > 0");
        if (!(horizon >= dt)) throw std::invalid_argument("sim: horizon must be >= dt");
        if (n_paths < 1) throw std::invalid_argument("sim: n_paths must be >= 1");
        if (rng_substeps < 1) throw std::invalid_argument("sim: rng_substeps must be >= 1");
        if (scheme != "log-euler") throw std::invalid_argument("sim: unknown scheme");
    }
};

// Simulated paths of the controlled ratio X*, habit H, wealth W = X H,
// consumption C = c* H and investment Pi = pi* H, sampled every
// `store_stride` steps. Values are laid out path-major.
struct PathSet {
    std::vector<double> times;
    int n_paths = 0;
    std::vector<double> X, H, W, C, Pi;
    long clamp_events = 0;      // policy queries beyond the resolved dual grid
    long threshold_crossings = 0;  // steps crossing the austerity threshold

    size_t n_times() const { return times.size(); }
    double at(const std::vector<double>& a, int path, size_t t_idx) const {
        return a[static_cast<size_t>(path) * times.size() + t_idx];
    }

    struct Summary {
        std::vector<double> mean, q05, q50, q95;
    };
    Summary summarize(const std::vector<double>& a) const {
        const size_t nt = times.size();
        Summary s;
        s.mean.resize(nt);
        s.q05.resize(nt);
        s.q50.resize(nt);
        s.q95.resize(nt);
        std::vector<double> col(n_paths);
        for (size_t t = 0; t < nt; ++t) {
            double acc = 0.0;
            for (int p = 0; p < n_paths; ++p) {
                col[p] = at(a, p, t);
                acc += col[p];
            }
            s.mean[t] = acc / n_paths;
            const auto q = [&](double frac) {
                const size_t k = static_cast<size_t>(frac * (n_paths - 1) + 0.5);
                std::nth_element(col.begin(), col.begin() + k, col.end());
                return col[k];
            };
            s.q05[t] = q(0.05);
            s.q50[t] = q(0.50);
            s.q95[t] = q(0.95);
        }
        return s;
    }
};

inline PathSet simulate(const PrimalSolution& primal, const SimConfig& cfg) {
    cfg.validate();
    const long nt = std::lround(cfg.horizon / cfg.dt);
    const double dt = cfg.horizon / static_cast<double>(nt);
    int stride = cfg.store_stride;
    if (stride <= 0) stride = static_cast<int>(std::max<long>(1, nt / 400));
    const size_t n_stored = static_cast<size_t>(nt / stride) + 1;

    PathSet out;
    out.n_paths = cfg.n_paths;
    out.times.resize(n_stored);
    for (size_t i = 0; i < n_stored; ++i) out.times[i] = static_cast<double>(i) * stride * dt;
    const size_t total = n_stored * static_cast<size_t>(cfg.n_paths);
    out.X.resize(total);
    out.H.resize(total);
    out.W.resize(total);
    out.C.resize(total);
    out.Pi.resize(total);

    const double mu = primal.dual().market.mu;
    const double sig = primal.dual().market.sigma;
    const double r = primal.dual().market.r;
    const double rho = primal.dual().market.rho;
    const double x0 = primal.x0();
    const int m = cfg.rng_substeps;
    const double sqrt_dt = std::sqrt(dt);

    std::vector<long> clamp_per_path(cfg.n_paths, 0), cross_per_path(cfg.n_paths, 0);

    const auto run_path = [&](int p) {
        double Z = std::log(cfg.x_init);
        double H = cfg.h_init;
        size_t slot = static_cast<size_t>(p) * n_stored;
        for (long k = 0; k <= nt; ++k) {
            const double X = std::exp(Z);
            const auto pol = primal.eval(X);
            if (pol.clamped) ++clamp_per_path[p];
            if (k % stride == 0) {
                const size_t idx = slot + static_cast<size_t>(k / stride);
                out.X[idx] = X;
                out.H[idx] = H;
                out.W[idx] = X * H;
                out.C[idx] = pol.c * H;
                out.Pi[idx] = pol.pi * H;
            }
            if (k == nt) break;
            const double pw = pol.pi / X;   // pi* e^{-Z}
            const double a = cfg.zero_vol ? 0.0 : sig * pw;
            const double b = r + rho + mu * pw - (1.0 / X + rho) * pol.c - 0.5 * a * a;
            double xi = 0.0;
            if (!cfg.zero_vol) {
                for (int i = 0; i < m; ++i)
                    xi += rng::gauss(cfg.seed, static_cast<std::uint64_t>(p),
                                     static_cast<std::uint64_t>(k) * m + i);
                xi /= std::sqrt(static_cast<double>(m));
            }
            const double Z_new = Z + b * dt + a * sqrt_dt * xi;
            if (!std::isfinite(Z_new)) {
                std::ostringstream os;
                os << "simulate: non-finite state on path " << p << " at step " << k
                   << " (X=" << X << ", c=" << pol.c << ", pi=" << pol.pi << ")";
                throw SolverError(os.str());
            }
            if ((X < x0) != (std::exp(Z_new) < x0)) ++cross_per_path[p];
            H *= std::exp(rho * (pol.c - 1.0) * dt);  // exact within the step
            Z = Z_new;
        }
    };

    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (int p = 0; p < cfg.n_paths; ++p) run_path(p);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w]() {
                for (int p = w; p < cfg.n_paths; p += jobs) run_path(p);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (int p = 0; p < cfg.n_paths; ++p) {
        out.clamp_events += clamp_per_path[p];
        out.threshold_crossings += cross_per_path[p];
    }
    return out;
}

struct TrendPoint {
    double T = 0.0;
    double mean = 0.0;
    double std_err = 0.0;
};

// Sample mean and standard error of e^{-delta T} v(X*_T) at each checkpoint,
// evaluated on a single set of paths run to the largest horizon.
inline std::vector<TrendPoint> discounted_value_trend(const PrimalSolution& primal,
                                                      SimConfig cfg,
                                                      std::vector<double> horizons) {
    std::sort(horizons.begin(), horizons.end());
    cfg.horizon = horizons.back();
    const long nt = std::lround(cfg.horizon / cfg.dt);
    cfg.store_stride = 0;
    // pick a stride hitting every checkpoint
    long stride = std::max<long>(1, nt / 400);
    const auto hits_all = [&](long s) {
        for (double T : horizons) {
            const long k = std::lround(T / (cfg.horizon / nt) );
            if (k % s != 0) return false;
        }
        return true;
    };
    while (stride > 1 && !hits_all(stride)) --stride;
    cfg.store_stride = static_cast<int>(stride);

    const PathSet ps = simulate(primal, cfg);
    const double delta = primal.dual().market.delta;
    std::vector<TrendPoint> trend;
    for (double T : horizons) {
        size_t idx = 0;
        double best = 1e300;
        for (size_t i = 0; i < ps.times.size(); ++i) {
            const double d = std::abs(ps.times[i] - T);
            if (d < best) {
                best = d;
                idx = i;
            }
        }
        TrendPoint tp;
        tp.T = ps.times[idx];
        double acc = 0.0, acc2 = 0.0;
        for (int p = 0; p < ps.n_paths; ++p) {
            const double val = std::exp(-delta * tp.T) * primal.value(ps.at(ps.X, p, idx));
            acc += val;
            acc2 += val * val;
        }
        tp.mean = acc / ps.n_paths;
        const double var = std::max(0.0, acc2 / ps.n_paths - tp.mean * tp.mean);
        tp.std_err = std::sqrt(var / ps.n_paths);
        trend.push_back(tp);
    }
    return trend;
}

}  // namespace habitfbp
