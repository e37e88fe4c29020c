#pragma once

#include <cstdint>
#include <vector>

#include "lifeplan/mc.hpp"
#include "lifeplan/model.hpp"
#include "lifeplan/simulate.hpp"

namespace lifeplan {

// Age-dependent mortality M_t = m e^{a t} (p.m is the force at age 0 and
// p.gompertz_a its growth rate). The purchase threshold becomes a curve over
// the current force, b(m): buy the policy the first time Z_t <= b(M_t). The
// curve solves a nonlinear integral equation — the expected discounted gain
// of the delay region, started on the boundary, must vanish:
//   0 = E[ integral_0^inf e^{-int_0^t (rho+M) ds}
//          (M_t u(q) - M_t u(l(q+B)) + Z_t M_t B) 1{Z_t >= b(M_t)} dt ],
// with Z_0 = b(m). It is solved by fixed-point iteration on common random
// numbers (the iteration map stays deterministic): per sweep and node the
// indicator set is frozen at the previous curve's shape, under which the
// residual is exactly linear in the node's value and its root is closed
// form; only the curve's shape across force levels iterates.

// Threshold curve on a mortality grid. Between nodes the value is linear in
// log m; beyond the ends each outer segment is extended as a power law
// (linear in log-log), which keeps extrapolated values positive when the
// simulated force outgrows the grid.
struct MortalityBoundary {
    std::vector<double> m_grid;    // increasing force levels
    std::vector<double> b_values;  // threshold at each level

    double at(double m) const;
};

// Log-spaced mortality grid covering [lo, hi].
std::vector<double> log_spaced_grid(double lo, double hi, int n);

// Paths of (W, Y, xi, Z, M) under the age-dependent force; thin wrapper over
// the shared exact-increment simulator (drift uses the closed-form time
// integral of M over each step).
PathBundle simulate_ZM(const ModelParams& p, const DerivedConstants& dc,
                       double z0, const SimConfig& sim);

// Monte Carlo estimate of the integral-equation right side at force level m:
// Z starts at candidate.at(m) (or z_start when given), the indicator
// compares Z_t against candidate.at(M_t), and the time horizon is cut where
// the deterministic discount weight falls below 1e-6. The estimate's
// horizon_T reports that cut. With a constant force the integral past the
// cut is appended in closed form (see tail_bound in the result for what
// remains); a growing force leaves the estimator defined by the truncation.
// At the true boundary the mean vanishes; starting above it gives a
// positive value (the residual equals the delay value of the start point).
McEstimate boundary_residual(const MortalityBoundary& candidate, double m,
                             const ModelParams& p, const DerivedConstants& dc,
                             const SimConfig& sim, double z_start = 0.0);

// Fixed-point solve over the node set `m_grid`. Per sweep, every node
// re-solves its start value against the previous sweep's curve: thresholds
// are frozen at beta_prev(M_t) / (beta_prev(m_node) eg_t) — invariant under
// jointly rescaling start value and curve — so the residual is linear in the
// candidate and the node's root is -S_const/S_linear in closed form. With a
// constant force those thresholds are already exact and one sweep recovers
// the constant-mortality answer from any start. Paths are generated once per
// call and reused across nodes and sweeps; the initial curve is the
// constant-force analytic threshold per node. Stops when the largest
// log-movement of any node is below tol; throws NoConvergence after
// max_iters sweeps, reporting the last movement. When `trace` is non-null,
// each sweep's curve is appended.
MortalityBoundary solve_boundary(const ModelParams& p,
                                 const DerivedConstants& dc,
                                 const std::vector<double>& m_grid,
                                 int max_iters, double tol,
                                 const SimConfig& sim,
                                 std::vector<MortalityBoundary>* trace =
                                     nullptr);

}  // namespace lifeplan
