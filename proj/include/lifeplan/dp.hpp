#pragma once

#include <functional>
#include <vector>

#include "lifeplan/model.hpp"

namespace lifeplan {

// Independent lattice check for the one-dimensional stopping problems in
// shadow-price coordinates: sup over stopping of
// E[ integral_0^eta e^{-(rho+m)s} g(Z_s) ds ], stopping payoff 0.
// None of the closed-form pieces enter; only the process drift/volatility
// and the gain-rate function do, so agreement with the analytic threshold is
// evidence, not tautology.

struct DpConfig {
    double z_anchor = 1.0;  // grid centre, typically the analytic threshold
    double span = 20.0;     // grid covers [z_anchor/span, z_anchor*span]
    int n_nodes = 600;      // log-uniform node count
    double dt = 1.0 / 250.0;
    double tol = 1e-9;      // sup-norm fixed-point tolerance
    int max_iters = 400000;
};

struct DpGrid {
    std::vector<double> z_grid;  // log-spaced, increasing
    double dt = 0.0;
    std::vector<double> value;   // fixed-point value per node
    double boundary = 0.0;       // largest grid z with value exactly 0;
                                 // 0 when every node is positive (threshold
                                 // below the grid)
};

// Value iteration with a trinomial one-step transition matched to the
// exact mean and second moment of the log displacement of Z over dt. The
// three branches land on grid nodes exactly (integer multiples of the log
// spacing), so the backup never interpolates between nodes: a chord
// through a convex value function overshoots it, and that one-signed
// error, injected every sweep, would be amplified by ~1/((rho+m) dt) in
// the fixed point. Below the grid the value is 0 (deep stop region);
// above it the continuation value is extended linearly in z, matching its
// asymptote.
// The backup is V = max(0, g(z) (1-e^{-(rho+m)dt})/(rho+m) + e^{-(rho+m)dt} E[V(Z')]).
// Iteration starts from V = 0, so stop-region nodes stay exactly zero and
// the threshold reads off as the last zero node. Throws NoConvergence when
// max_iters sweeps do not reach tol, ConfigError when the trinomial
// probabilities cannot be made nonnegative for the given dt and grid.
DpGrid dp_dual_oracle(const ModelParams& p, const DerivedConstants& dc,
                      const DpConfig& cfg,
                      const std::function<double(double)>& gain);

// Gain rates for the three stopping problems this oracle cross-checks.
// Fixed payout B, no reserved wealth: g(z) = h z - m u(l B).
std::function<double(double)> gain_fixed_payout(const ModelParams& p,
                                                const DerivedConstants& dc);
// Fixed payout with reserved amount q: g(z) = h z + m u(q) - m u(l(B+q)).
std::function<double(double)> gain_fixed_payout_reserved(
    const ModelParams& p, const DerivedConstants& dc, double q);
// Payout chosen at purchase: g(z) = -K ubar(z) < 0 for gamma < 1, so the
// oracle value must vanish identically (purchase at once everywhere).
std::function<double(double)> gain_chosen_payout(const ModelParams& p,
                                                 const DerivedConstants& dc);

}  // namespace lifeplan
