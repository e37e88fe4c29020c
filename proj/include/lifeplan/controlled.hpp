#pragma once

#include "lifeplan/model.hpp"
#include "lifeplan/predetermined.hpp"

namespace lifeplan {

// Variant where the payout amount is chosen by the agent at purchase time.
// Buying immediately is optimal for every gamma, the chosen payout is a
// closed form in the shadow price, and the value function is a pure power
// of total wealth x + y/kappa.

struct ControlledSolution {
    // D = 1/K + m (l r)^{(1-gamma)/gamma} (rho+m)^{-1/gamma}; consumption is
    // (x + y/kappa) / D.
    double D = 0.0;
    // Multiplier of (x + y/kappa)^{1-gamma}/(1-gamma) in the value function.
    // Equals D^gamma, the only constant consistent with V_x = z*.
    double value_coefficient = 0.0;
};

ControlledSolution solve_controlled(const ModelParams& p,
                                    const DerivedConstants& dc);

// Legacy-utility flow net of premium cost, maximized over the payout:
//   bar_u(z) = sup_{B >= 0} [ m u(lB)/(rho+m) - z m B / r ]
//            = m l^{(1-gamma)/gamma} (gamma/(1-gamma)) r^{(1-gamma)/gamma}
//              (rho+m)^{-1/gamma} z^{(gamma-1)/gamma}.
// Positive for gamma < 1, negative for gamma > 1 (both are valid inputs).
double bar_u(double z, const ModelParams& p, const DerivedConstants& dc);

// The maximizing payout: B0*(z) = [z (rho+m)/r]^{-1/gamma} l^{(1-gamma)/gamma}.
double bequest_star(double z, const ModelParams& p, const DerivedConstants& dc);

// Shadow price z*(x, y) = [(x + y/kappa)/D]^{-gamma}, strictly decreasing in x.
double z_star_B(double x, double y, const ModelParams& p,
                const DerivedConstants& dc);

// Feedback rule: consumption (x+y/kappa)/D, investment
// c* theta/(gamma K sigma) - sigma_y y/(kappa sigma), payout
// c* ((rho+m)/r)^{-1/gamma} l^{(1-gamma)/gamma}; always purchase-now.
PolicyDecision policy_B(double x, double y, const ModelParams& p,
                        const DerivedConstants& dc);

// Lifetime utility D^gamma (x + y/kappa)^{1-gamma}/(1-gamma); satisfies
// dV/dx = z_star_B(x, y).
double value_B(double x, double y, const ModelParams& p,
               const DerivedConstants& dc);

}  // namespace lifeplan
