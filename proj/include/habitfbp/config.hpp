#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "habitfbp/dual_solver.hpp"
#include "habitfbp/market.hpp"
#include "habitfbp/simulate.hpp"
#include "habitfbp/utility.hpp"

namespace habitfbp {

using json = nlohmann::json;

// Schema violation; carries the offending field path for the CLI message.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_path(std::move(field)) {}
    std::string field_path;
};

struct Config {
    MarketParams market;
    UtilitySpec utility;
    SolverControls solver;
    SimConfig sim;
    json resolved;   // fully-populated config, stable key order
};

namespace cfg_detail {

inline double need_num(const json& obj, const std::string& section, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(section + "." + key, "missing required field");
    if (!obj[key].is_number()) throw ConfigError(section + "." + key, "must be a number");
    return obj[key].get<double>();
}

inline double opt_num(const json& obj, const std::string& section, const std::string& key,
                      double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(section + "." + key, "must be a number");
    return obj[key].get<double>();
}

inline void reject_unknown(const json& obj, const std::string& section,
                           const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError(section + "." + it.key(), "unknown field");
}

}  // namespace cfg_detail

inline UtilitySpec utility_from_json(const json& u) {
    using namespace cfg_detail;
    if (!u.contains("family")) throw ConfigError("utility.family", "missing required field");
    if (!u["family"].is_string()) throw ConfigError("utility.family", "must be a string");
    const std::string family = u["family"].get<std::string>();
    try {
        if (family == "power") {
            reject_unknown(u, "utility", {"family", "alpha", "p", "q", "kappa"});
            return make_power(need_num(u, "utility", "alpha"), need_num(u, "utility", "p"),
                              need_num(u, "utility", "q"), need_num(u, "utility", "kappa"));
        }
        if (family == "shifted_power") {
            reject_unknown(u, "utility", {"family", "alpha", "p", "q", "kappa"});
            return make_shifted_power(need_num(u, "utility", "alpha"),
                                      need_num(u, "utility", "p"), need_num(u, "utility", "q"),
                                      need_num(u, "utility", "kappa"));
        }
        if (family == "exponential") {
            reject_unknown(u, "utility", {"family", "alpha", "p", "q", "kappa"});
            return make_exponential(need_num(u, "utility", "alpha"), need_num(u, "utility", "p"),
                                    need_num(u, "utility", "q"), need_num(u, "utility", "kappa"));
        }
        if (family == "sahara") {
            reject_unknown(u, "utility",
                           {"family", "alpha", "gamma1", "beta1", "gamma2", "beta2"});
            return make_sahara(need_num(u, "utility", "alpha"), need_num(u, "utility", "gamma1"),
                               need_num(u, "utility", "beta1"), need_num(u, "utility", "gamma2"),
                               need_num(u, "utility", "beta2"));
        }
        if (family == "aby22_approx") {
            reject_unknown(u, "utility", {"family", "alpha", "kappa", "eps"});
            return make_aby22_approx(need_num(u, "utility", "alpha"),
                                     need_num(u, "utility", "kappa"),
                                     need_num(u, "utility", "eps"));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("utility", e.what());
    }
    throw ConfigError("utility.family", "unknown family '" + family + "'");
}

// Parses a config object. Absent or empty sections fall back to the built-in
// base case; a non-empty "market"/"utility" section must be complete.
// "solver" and "sim" accept per-field overrides.
inline Config parse_config(const json& root) {
    using namespace cfg_detail;
    if (!root.is_object()) throw ConfigError("(root)", "config must be a JSON object");
    reject_unknown(root, "(root)", {"market", "utility", "solver", "sim"});

    Config c;

    const json market = root.value("market", json::object());
    if (!market.is_object()) throw ConfigError("market", "must be an object");
    if (!market.empty()) {
        reject_unknown(market, "market", {"r", "mu", "sigma", "rho", "delta"});
        c.market.r = need_num(market, "market", "r");
        c.market.mu = need_num(market, "market", "mu");
        c.market.sigma = need_num(market, "market", "sigma");
        c.market.rho = need_num(market, "market", "rho");
        c.market.delta = need_num(market, "market", "delta");
    }
    try {
        c.market.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("market", e.what());
    }

    const json utility = root.value("utility", json::object());
    if (!utility.is_object()) throw ConfigError("utility", "must be an object");
    if (utility.empty()) {
        c.utility = make_power(0.75, 0.2, 0.5, 2.0);   // base-case preferences
    } else {
        c.utility = utility_from_json(utility);
    }

    const json solver = root.value("solver", json::object());
    if (!solver.is_object()) throw ConfigError("solver", "must be an object");
    reject_unknown(solver, "solver",
                   {"rel_tol", "abs_tol", "y_min_factor", "shoot_tol", "max_steps"});
    c.solver.rel_tol = opt_num(solver, "solver", "rel_tol", c.solver.rel_tol);
    c.solver.abs_tol = opt_num(solver, "solver", "abs_tol", c.solver.abs_tol);
    c.solver.y_min_factor = opt_num(solver, "solver", "y_min_factor", c.solver.y_min_factor);
    c.solver.shoot_tol = opt_num(solver, "solver", "shoot_tol", c.solver.shoot_tol);
    c.solver.max_steps =
        static_cast<int>(opt_num(solver, "solver", "max_steps", c.solver.max_steps));

    const json sim = root.value("sim", json::object());
    if (!sim.is_object()) throw ConfigError("sim", "must be an object");
    reject_unknown(sim, "sim",
                   {"x_init", "h_init", "horizon", "dt", "n_paths", "seed", "scheme"});
    c.sim.x_init = opt_num(sim, "sim", "x_init", c.sim.x_init);
    c.sim.h_init = opt_num(sim, "sim", "h_init", c.sim.h_init);
    c.sim.horizon = opt_num(sim, "sim", "horizon", c.sim.horizon);
    c.sim.dt = opt_num(sim, "sim", "dt", c.sim.dt);
    c.sim.n_paths = static_cast<int>(opt_num(sim, "sim", "n_paths", c.sim.n_paths));
    c.sim.seed = static_cast<std::uint64_t>(opt_num(sim, "sim", "seed", 1.0));
    if (sim.contains("scheme")) {
        if (!sim["scheme"].is_string()) throw ConfigError("sim.scheme", "must be a string");
        c.sim.scheme = sim["scheme"].get<std::string>();
    }
    try {
        c.sim.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("sim", e.what());
    }

    // resolved config: every applied value, stable key order
    c.resolved = {
        {"market",
         {{"r", c.market.r},
          {"mu", c.market.mu},
          {"sigma", c.market.sigma},
          {"rho", c.market.rho},
          {"delta", c.market.delta}}},
        {"utility", json{{"family", c.utility.family}, {"alpha", c.utility.alpha}}},
        {"solver",
         {{"rel_tol", c.solver.rel_tol},
          {"abs_tol", c.solver.abs_tol},
          {"y_min_factor", c.solver.y_min_factor},
          {"shoot_tol", c.solver.shoot_tol},
          {"max_steps", c.solver.max_steps}}},
        {"sim",
         {{"x_init", c.sim.x_init},
          {"h_init", c.sim.h_init},
          {"horizon", c.sim.horizon},
          {"dt", c.sim.dt},
          {"n_paths", c.sim.n_paths},
          {"seed", c.sim.seed},
          {"scheme", c.sim.scheme}}}};
    for (const auto& [k, v] : c.utility.params) c.resolved["utility"][k] = v;
    return c;
}

inline json load_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("(file)", "cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("(file)", std::string("JSON parse error: ") + e.what());
    }
    return j;
}

// FNV-1a 64-bit over the canonical dump; names the run directory.
inline std::string content_hash(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace habitfbp
