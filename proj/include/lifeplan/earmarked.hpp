#pragma once

#include "lifeplan/model.hpp"

namespace lifeplan {

// Variants where a slice q of initial wealth is reserved for the heirs: if
// the agent dies uninsured the heirs receive q, and an insured death pays
// l(q + B) instead. The purchase threshold then exists for every gamma
// (including gamma > 1, where the unreserved problem forces an immediate
// purchase).

// Fixed-payout variant: threshold and delay-value coefficient.
struct EarmarkedPredeterminedSolution {
    double b_bar = 0.0;   // shadow-price purchase threshold
    double C1_bar = 0.0;  // coefficient of z^{alpha1} in the delay value
};

// b_bar = [m u(l(B+q)) - m u(q)] r alpha1 / ((rho+m) h (alpha1-1)), with
// h = m B; C1_bar = -(h/(r alpha1)) b_bar^{1-alpha1}. Valid for any
// gamma != 1. Throws DegenerateBoundary when u(l(B+q)) <= u(q) (insurance
// cannot improve the legacy), NeedsRhoPlusMGreaterR when rho + m <= r, and
// DomainError for q <= 0 or B < 0.
EarmarkedPredeterminedSolution earmarked_boundary(const ModelParams& p,
                                                  const DerivedConstants& dc,
                                                  double q, double B);

// Delay value in shadow-price coordinates: 0 for z <= b_bar, else
// C1_bar z^{alpha1} + (h/r) z - m [u(l(B+q)) - u(q)]/(rho+m); C^1 at b_bar.
double earmarked_w(double z, const EarmarkedPredeterminedSolution& sol,
                   const ModelParams& p, const DerivedConstants& dc, double q,
                   double B);

// d/dz of earmarked_w (analytic).
double earmarked_w_z(double z, const EarmarkedPredeterminedSolution& sol,
                     const ModelParams& p, const DerivedConstants& dc,
                     double q, double B);

// Chosen-payout variant. Above the shadow price L_bar the agent would choose
// a zero payout, so the insurance only matters below it; the delay value is
// glued from three branches with C^1 fits at b_tilde and at L_bar.
struct EarmarkedControlledSolution {
    double b_tilde = 0.0;  // purchase threshold, must satisfy b_tilde < L_bar
    double A1 = 0.0;       // middle-branch z^{alpha1} coefficient
    double A2 = 0.0;       // middle-branch z^{alpha2} coefficient
    double B1 = 0.0;       // upper-branch z^{alpha1} coefficient
    double L_bar = 0.0;    // payout shutoff threshold q^{-gamma} l^{1-gamma} r/(rho+m)
    double Delta = 0.0;    // upper-branch constant m[u(q) - u(lq)]/(rho+m)
    double C = 0.0;        // m l^{(1-g)/g} (g/(1-g)) r^{(1-g)/g} (rho+m)^{-1/g}
    double q = 0.0;        // reserved amount the solution was built for
    bool conditions_ok = false;  // all verification hypotheses hold
};

// L_bar = q^{-gamma} l^{1-gamma} r / (rho + m).
double threshold_L(const ModelParams& p, double q);

// Optimized legacy flow net of premium, with the payout floored at zero:
//   z < L_bar: value C z^{(gamma-1)/gamma} + z m q / r,
//              payout [z(rho+m)/r]^{-1/gamma} l^{(1-gamma)/gamma} - q;
//   z >= L_bar: value m u(l q)/(rho+m), payout 0.
// C^1 at L_bar with zero slope there, convex below it.
struct TildeU {
    double value;
    double bequest;
};
TildeU tilde_u(double z, const ModelParams& p, double q);

// Solves the four smooth-fit conditions (value and slope at b_tilde; value
// and slope at L_bar) for (A1, A2, B1, b_tilde). For fixed b_tilde the
// conditions are linear in the coefficients: the two b_tilde equations give
// (A1, A2) by a 2x2 solve, the slope condition at L_bar gives B1, and the
// value condition at L_bar is the scalar residual driven to zero by scanning
// 4000 log-spaced candidates on (L_bar*1e-6, L_bar) and bisecting the unique
// sign change. Populates conditions_ok by checking b_tilde < L_bar,
// F(b_tilde) = m u(q) - K tilde_u(b_tilde) + b_tilde K m q / r <= 0, and
// tilde_w >= 0 on a 10^4-point log grid over [b_tilde/100, 100 L_bar]
// (a certificate, not a proof).
// Throws UnsupportedRegime when no sign change exists (multi-threshold
// parameter region) and NoConvergence when several do.
EarmarkedControlledSolution smooth_fit_solve(const ModelParams& p,
                                             const DerivedConstants& dc,
                                             double q);

// Piecewise delay value: 0 below b_tilde;
// A1 z^{a1} + A2 z^{a2} + m u(q)/(rho+m) - C z^{(g-1)/g} on (b_tilde, L_bar];
// B1 z^{a1} + Delta above. Requires sol.conditions_ok.
double tilde_w(double z, const EarmarkedControlledSolution& sol,
               const ModelParams& p, const DerivedConstants& dc);

// d/dz of tilde_w (analytic).
double tilde_w_z(double z, const EarmarkedControlledSolution& sol,
                 const ModelParams& p, const DerivedConstants& dc);

}  // namespace lifeplan
