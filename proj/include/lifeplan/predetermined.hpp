#pragma once

#include "lifeplan/model.hpp"

namespace lifeplan {

// Solution of the fixed-payout problem: the agent chooses consumption, a
// risky allocation, and the time to start paying the premium h = m*B in
// exchange for the heirs receiving B at death. The decision reduces to a
// threshold rule on the shadow-price process Z: buy the first time Z falls
// to b. All quantities below are closed forms built from that threshold.

struct PredeterminedSolution {
    double b = 0.0;   // shadow-price purchase threshold (gamma < 1 only)
    double C1 = 0.0;  // coefficient of the z^{alpha1} term of the delay value
    bool immediate_purchase = false;  // true iff gamma > 1: buy at time 0
};

enum class Region { Continue, Stop };

// Feedback decision at a wealth/income point. `bequest` is the insured
// payout: 0 while uninsured, the fixed B once purchase is (or has been)
// triggered. `z_star` is the shadow price backing the consumption rule.
struct PolicyDecision {
    Region region = Region::Continue;
    double consumption = 0.0;  // currency / yr
    double investment = 0.0;   // currency allocated to the risky asset
    double z_star = 0.0;
    double bequest = 0.0;
};

// Smooth-fit threshold and coefficient:
//   b  = m u(lB) r alpha1 / ((rho+m) h (alpha1 - 1)),
//   C1 = -(h / (r alpha1)) b^{1 - alpha1}.
// For gamma > 1 waiting is never optimal and only the flag is set.
// Throws NeedsRhoPlusMGreaterR when gamma < 1 and rho + m <= r, and
// DomainError when B <= 0.
PredeterminedSolution solve(const ModelParams& p, const DerivedConstants& dc);

// Value of the option to delay the purchase, in shadow-price coordinates:
// 0 for z <= b, C1 z^{alpha1} + (h/r) z - m u(lB)/(rho+m) above, glued C^1
// at b. Monotone nondecreasing with 0 <= w(z) <= z h / r.
double dual_w_hat(double z, const PredeterminedSolution& sol,
                  const ModelParams& p, const DerivedConstants& dc);

// d/dz of dual_w_hat (analytic).
double dual_w_hat_z(double z, const PredeterminedSolution& sol,
                    const ModelParams& p, const DerivedConstants& dc);

// Full dual value v(z, y), strictly convex in z:
//   z > b (waiting):  C1 z^{alpha1} + (gamma/((1-gamma)K)) z^{(gamma-1)/gamma} + z y / kappa
//   z <= b (insured): (gamma/((1-gamma)K)) z^{(gamma-1)/gamma} + z y / kappa
//                     - h z / r + m u(lB)/(rho+m)
// For gamma > 1 every z uses the insured branch.
double dual_v(double z, double y, const PredeterminedSolution& sol,
              const ModelParams& p, const DerivedConstants& dc);

// d/dz of dual_v (analytic, continuous across b by smooth fit).
double dual_v_z(double z, double y, const PredeterminedSolution& sol,
                const ModelParams& p, const DerivedConstants& dc);

// Shadow price z*(x, y) inverting x = -v_z(z, y): the insured branch is the
// closed form [(x - h/r + y/kappa) K]^{-gamma}; the waiting branch solves
// C1 alpha1 z^{alpha1-1} - z^{-1/gamma}/K + y/kappa + x = 0 by a
// bisection-safeguarded Newton on log z, bracketed in (b, inf), to 1e-12
// relative tolerance. Strictly decreasing in x.
// Throws DomainError when x <= -y/kappa.
double z_star(double x, double y, const PredeterminedSolution& sol,
              const ModelParams& p, const DerivedConstants& dc);

// Wealth threshold b_hat(y) = b^{-1/gamma}/K - y/kappa + h/r above which the
// purchase triggers. Strictly decreasing in y.
// Throws ImmediatePurchase for gamma > 1 (the threshold degenerates).
double primal_boundary(double y, const PredeterminedSolution& sol,
                       const ModelParams& p, const DerivedConstants& dc);

// Lifetime utility V(x, y); continuous across the wealth threshold with
// V_x(x, y) = z*(x, y).
double value(double x, double y, const PredeterminedSolution& sol,
             const ModelParams& p, const DerivedConstants& dc);

// Feedback consumption/investment/region at (x, y). Consumption is
// z*^{-1/gamma} while waiting and K (x - h/r + y/kappa) once insured (the
// two agree at the threshold); the investment has a jump there.
// Throws AdmissibilityViolated if an insured-region query has
// x + y/kappa <= h/r.
PolicyDecision policy(double x, double y, const PredeterminedSolution& sol,
                      const ModelParams& p, const DerivedConstants& dc);

}  // namespace lifeplan
