#pragma once

#include <string>

#include "lifeplan/model.hpp"
#include "lifeplan/simulate.hpp"

namespace lifeplan {

// Run settings assembled from a flat `key = value` file. Model and
// simulation keys default to the baseline parameter set; sweep and
// mortality-grid keys drive the CLI's sweep and boundary-curve outputs.
struct RunConfig {
    ModelParams params;
    SimConfig sim;
    std::string sweep_variable;  // one of the model keys; empty = no sweep
    double sweep_lo = 0.0;
    double sweep_hi = 0.0;
    int sweep_n = 0;
    double m_grid_lo = 0.005;  // mortality-force grid for boundary curves
    double m_grid_hi = 0.1;
    int m_grid_n = 16;
};

// Parses `text`. Grammar: one `key = value` per line, `#` starts a comment,
// blank lines ignored. Keys: the ModelParams fields (mu, sigma, r, rho,
// gamma, mu_y, sigma_y, l, m, bequest_B, earmark_q, gompertz_a, x0, y0),
// the SimConfig fields (n_paths, dt, horizon_T, seed, antithetic), and
// sweep_variable, sweep_lo, sweep_hi, sweep_n, m_grid_lo, m_grid_hi,
// m_grid_n. Unknown or duplicate keys and malformed values raise
// Error(ConfigError) with `origin` and the 1-based line number.
RunConfig parse_config(const std::string& text, const std::string& origin);

// Reads the file and parses it; the file name becomes the error origin.
RunConfig load_config(const std::string& path);

}  // namespace lifeplan
