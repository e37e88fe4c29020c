#pragma once

#include <functional>
#include <utility>

namespace lifeplan {

// Scalar root finding and line minimization used by the solvers. All
// routines throw Error(NoRoot / NoConvergence) on failure instead of
// returning sentinel values.

// Value and derivative of a scalar function at one point.
struct ValueSlope {
    double value;
    double slope;
};

// Bisection-safeguarded Newton iteration on [lo, hi], which must bracket a
// root (f(lo) and f(hi) of opposite sign, either order). A Newton step is
// taken when it stays inside the current bracket and at least halves it in
// spirit; otherwise the step falls back to bisection. Converges when the
// bracket or the step is below rel_tol * |root| + abs_tol.
double bracketed_newton(const std::function<ValueSlope(double)>& f, double lo,
                        double hi, double rel_tol = 1e-12,
                        double abs_tol = 0.0, int max_iter = 200);

// Plain bisection for functions whose derivative is unavailable or untrusted.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double rel_tol = 1e-12, double abs_tol = 0.0,
              int max_iter = 400);

// Expands [guess, guess * factor] geometrically upward until f changes sign,
// returning the bracketing pair. f(guess) fixes the reference sign.
std::pair<double, double> grow_bracket_up(
    const std::function<double(double)>& f, double guess, double factor = 2.0,
    int max_steps = 200);

// Golden-section minimization of a unimodal function on [lo, hi].
double golden_min(const std::function<double(double)>& f, double lo,
                  double hi, double rel_tol = 1e-10, int max_iter = 300);

// Minimum VALUE of f over [z_lo, z_hi]: log-spaced scan of n_scan points,
// then golden refinement inside the best cell. Robust global search for
// convex-in-log objectives such as dual values.
double log_grid_min_value(const std::function<double(double)>& f,
                          double z_lo, double z_hi, int n_scan = 481);

}  // namespace lifeplan
