#pragma once

// Self-contained consistency battery: closed-form solutions are re-checked
// against the variational inequalities they claim to solve, strong duality
// is probed pointwise by direct numerical minimization, and the Monte Carlo
// engine's budget identity ties the dual quantities back to the wealth
// dynamics. Everything here is redundant with the constructive solvers on
// purpose — it exists to catch wiring mistakes, not to compute anything new.

#include <iosfwd>

#include "lifeplan/controlled.hpp"
#include "lifeplan/earmarked.hpp"
#include "lifeplan/model.hpp"
#include "lifeplan/predetermined.hpp"
#include "lifeplan/simulate.hpp"

namespace lifeplan {

// Gap between the primal value V(x, y) and a direct numerical minimization
// of z |-> dual_v(z, y) + z x over z > 0 (coarse log-grid scan + golden
// section refinement, independent of the solver's own first-order root).
// Nonnegative up to minimizer resolution; |gap| ~ 0 certifies strong
// duality at the point.
double duality_gap(double x, double y, const PredeterminedSolution& sol,
                   const ModelParams& p, const DerivedConstants& dc);

// Same check for the insurer-chosen-payout value: the dual of
// D^gamma (x + y/kappa)^{1-gamma}/(1-gamma) is D*u_dual(z) + z y/kappa.
double duality_gap_controlled(double x, double y, const ModelParams& p,
                              const DerivedConstants& dc);

// Residual summary of a variational-inequality sweep.
struct SweepReport {
    // Max relative residual of the continuation ODE
    // (1/2) theta^2 z^2 w'' + (rho - r + m) z w' - (rho + m) w + gain(z)
    // over a log-spaced sample of the continuation region.
    double max_ode_rel = 0.0;
    // Max positive part of gain(z) on the stop side (waiting must not pay).
    double max_obstacle_pos = 0.0;
    // Min of the delay value over the sweep (must be >= 0).
    double min_value = 0.0;
};

SweepReport sweep_fixed_payout(const PredeterminedSolution& sol,
                               const ModelParams& p,
                               const DerivedConstants& dc,
                               int n_points = 4000);

SweepReport sweep_fixed_payout_reserved(
    const EarmarkedPredeterminedSolution& sol, const ModelParams& p,
    const DerivedConstants& dc, double q, int n_points = 4000);

SweepReport sweep_chosen_payout_reserved(
    const EarmarkedControlledSolution& sol, const ModelParams& p,
    const DerivedConstants& dc, int n_points = 4000);

// Runs the full battery against the given parameters, printing one
// [PASS]/[FAIL]/[SKIP] line per check to `os` and a final "RESULT:" line.
// Returns true when every applicable check passes. `corrupt_factor`
// deliberately displaces the free boundaries by that factor before the
// checks run (negative control: anything but 1.0 must make the battery
// fail); it is exposed through a hidden CLI flag only.
bool run_verification(const ModelParams& p, const DerivedConstants& dc,
                      const SimConfig& sim, std::ostream& os,
                      double corrupt_factor = 1.0);

}  // namespace lifeplan
