#include "lifeplan/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "lifeplan/errors.hpp"

namespace lifeplan {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& what) {
    throw Error(ErrorCode::ConfigError,
                origin + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, const std::string& origin,
                    int line) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        fail(origin, line, "expected a number, got '" + v + "'");
    }
    return x;
}

long long parse_int(const std::string& v, const std::string& origin,
                    int line) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        fail(origin, line, "expected an integer, got '" + v + "'");
    }
    return x;
}

bool parse_bool(const std::string& v, const std::string& origin, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(origin, line, "expected true/false, got '" + v + "'");
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    using Setter = std::function<void(const std::string&, int)>;
    std::map<std::string, Setter> keys;

    auto dbl = [&](double* slot) {
        return [&, slot](const std::string& v, int line) {
            *slot = parse_double(v, origin, line);
        };
    };
    keys["mu"] = dbl(&cfg.params.mu);
    keys["sigma"] = dbl(&cfg.params.sigma);
    keys["r"] = dbl(&cfg.params.r);
    keys["rho"] = dbl(&cfg.params.rho);
    keys["gamma"] = dbl(&cfg.params.gamma);
    keys["mu_y"] = dbl(&cfg.params.mu_y);
    keys["sigma_y"] = dbl(&cfg.params.sigma_y);
    keys["l"] = dbl(&cfg.params.l);
    keys["m"] = dbl(&cfg.params.m);
    keys["bequest_B"] = dbl(&cfg.params.bequest_B);
    keys["earmark_q"] = dbl(&cfg.params.earmark_q);
    keys["gompertz_a"] = dbl(&cfg.params.gompertz_a);
    keys["x0"] = dbl(&cfg.params.x0);
    keys["y0"] = dbl(&cfg.params.y0);
    keys["dt"] = dbl(&cfg.sim.dt);
    keys["horizon_T"] = dbl(&cfg.sim.horizon_T);
    keys["sweep_lo"] = dbl(&cfg.sweep_lo);
    keys["sweep_hi"] = dbl(&cfg.sweep_hi);
    keys["m_grid_lo"] = dbl(&cfg.m_grid_lo);
    keys["m_grid_hi"] = dbl(&cfg.m_grid_hi);
    keys["n_paths"] = [&](const std::string& v, int line) {
        const long long n = parse_int(v, origin, line);
        if (n < 2) fail(origin, line, "n_paths must be >= 2");
        cfg.sim.n_paths = static_cast<std::size_t>(n);
    };
    keys["seed"] = [&](const std::string& v, int line) {
        cfg.sim.seed = static_cast<std::uint64_t>(parse_int(v, origin, line));
    };
    keys["antithetic"] = [&](const std::string& v, int line) {
        cfg.sim.antithetic = parse_bool(v, origin, line);
    };
    keys["sweep_variable"] = [&](const std::string& v, int line) {
        (void)line;
        cfg.sweep_variable = v;
    };
    keys["sweep_n"] = [&](const std::string& v, int line) {
        const long long n = parse_int(v, origin, line);
        if (n < 2) fail(origin, line, "sweep_n must be >= 2");
        cfg.sweep_n = static_cast<int>(n);
    };
    keys["m_grid_n"] = [&](const std::string& v, int line) {
        const long long n = parse_int(v, origin, line);
        if (n < 1) fail(origin, line, "m_grid_n must be >= 1");
        cfg.m_grid_n = static_cast<int>(n);
    };

    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(origin, line_no, "expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(origin, line_no, "missing key before '='");
        if (value.empty()) {
            fail(origin, line_no, "missing value for key '" + key + "'");
        }
        const auto it = keys.find(key);
        if (it == keys.end()) {
            fail(origin, line_no, "unknown key '" + key + "'");
        }
        if (!seen.insert(key).second) {
            fail(origin, line_no, "duplicate key '" + key + "'");
        }
        it->second(value, line_no);
    }

    if (!(cfg.sim.dt > 0.0) || !(cfg.sim.horizon_T > 0.0)) {
        throw Error(ErrorCode::ConfigError,
                    origin + ": dt and horizon_T must be positive");
    }
    if (!cfg.sweep_variable.empty()) {
        static const std::set<std::string> sweepable = {
            "mu",      "sigma", "r",         "rho",        "gamma",
            "mu_y",    "sigma_y", "l",       "m",          "bequest_B",
            "earmark_q", "gompertz_a", "x0", "y0"};
        if (sweepable.count(cfg.sweep_variable) == 0) {
            throw Error(ErrorCode::ConfigError,
                        origin + ": sweep_variable '" + cfg.sweep_variable +
                            "' is not a model parameter");
        }
        if (cfg.sweep_n < 2 || !(cfg.sweep_hi > cfg.sweep_lo)) {
            throw Error(ErrorCode::ConfigError,
                        origin +
                            ": a sweep needs sweep_n >= 2 and "
                            "sweep_hi > sweep_lo");
        }
    }
    if (!(cfg.m_grid_lo > 0.0) || !(cfg.m_grid_hi > cfg.m_grid_lo) ||
        cfg.m_grid_n < 1) {
        throw Error(ErrorCode::ConfigError,
                    origin + ": mortality grid needs 0 < m_grid_lo < "
                             "m_grid_hi and m_grid_n >= 1");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::ConfigError,
                    "cannot open config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace lifeplan
