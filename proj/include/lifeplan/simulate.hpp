#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lifeplan/model.hpp"

namespace lifeplan {

// Simulation request shared by every Monte Carlo facility.
struct SimConfig {
    std::size_t n_paths = 10000;
    double dt = 1.0 / 52.0;   // step (yr)
    double horizon_T = 50.0;  // truncation time (yr)
    std::uint64_t seed = 1;
    bool antithetic = false;
};

// Materialized sample paths of the driving processes on a uniform grid.
// Arrays are row-major: entry for (path p, time index k) lives at
// p * n_times() + k. W is the Brownian motion; Y the labor income; xi the
// state-price density; Z the shadow-price process started at z0; M the force
// of mortality (filled only when it is age-dependent, i.e. gompertz_a > 0).
struct PathBundle {
    std::vector<double> t;  // time grid, size n_times()
    std::vector<double> W;
    std::vector<double> Y;
    std::vector<double> xi;
    std::vector<double> Z;
    std::vector<double> M;  // empty when mortality is constant
    double z0 = 1.0;
    std::size_t n_paths = 0;

    std::size_t n_times() const { return t.size(); }
    std::size_t at(std::size_t path, std::size_t k) const {
        return path * t.size() + k;
    }
};

// Advances Y, xi, Z by exact lognormal increments (their dynamics are linear,
// so each step is distribution-exact for any dt); the step size only matters
// for quantities integrated along the paths, never for the marginal laws.
// With gompertz_a > 0 the mortality M_t = m e^{a t} is included and the
// Z-drift uses the exact time integral of M over each step. With
// sim.antithetic, paths 2k and 2k+1 share increment magnitudes with flipped
// signs. Identical inputs produce bit-identical bundles.
PathBundle simulate_paths(const ModelParams& p, const DerivedConstants& dc,
                          const SimConfig& sim, double z0 = 1.0);

// Writes the bundle as CSV with header "t, path_id, W, Y, xi, Z" plus a
// trailing ", M" column when mortality is age-dependent.
void write_paths_csv(const PathBundle& bundle, const std::string& path);

}  // namespace lifeplan
