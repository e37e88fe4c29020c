#include "lifeplan/earmarked.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lifeplan/errors.hpp"
#include "lifeplan/rootfind.hpp"

namespace lifeplan {

namespace {

// Legacy-utility gain from insuring: m [u(l(B+q)) - u(q)] / (rho + m).
double legacy_gain_flow(const ModelParams& p, double q, double B) {
    return p.m * (crra_u(p.l * (B + q), p.gamma) - crra_u(q, p.gamma)) /
           (p.rho + p.m);
}

}  // namespace

EarmarkedPredeterminedSolution earmarked_boundary(const ModelParams& p,
                                                  const DerivedConstants& dc,
                                                  double q, double B) {
    if (!(q > 0.0)) {
        throw Error(ErrorCode::DomainError,
                    "earmarked_boundary: reserved amount q must be positive");
    }
    if (!(B > 0.0)) {
        throw Error(ErrorCode::DomainError,
                    "earmarked_boundary: payout B must be positive");
    }
    if (!(p.rho + p.m > p.r)) {
        throw Error(ErrorCode::NeedsRhoPlusMGreaterR,
                    "earmarked_boundary: requires rho + m > r");
    }
    const double gain = p.m * (crra_u(p.l * (B + q), p.gamma) -
                               crra_u(q, p.gamma));
    if (!(gain > 0.0)) {
        throw Error(ErrorCode::DegenerateBoundary,
                    "earmarked_boundary: insuring does not improve the legacy "
                    "(m u(l(B+q)) <= m u(q)); no finite threshold");
    }
    const double h = p.m * B;
    EarmarkedPredeterminedSolution sol;
    sol.b_bar = gain * p.r * dc.alpha1 /
                ((p.rho + p.m) * h * (dc.alpha1 - 1.0));
    sol.C1_bar = -(h / (p.r * dc.alpha1)) *
                 std::pow(sol.b_bar, 1.0 - dc.alpha1);
    return sol;
}

double earmarked_w(double z, const EarmarkedPredeterminedSolution& sol,
                   const ModelParams& p, const DerivedConstants& dc, double q,
                   double B) {
    if (!(z > 0.0)) {
        throw Error(ErrorCode::DomainError,
                    "earmarked_w: z must be positive");
    }
    if (z <= sol.b_bar) return 0.0;
    const double h = p.m * B;
    return sol.C1_bar * std::pow(z, dc.alpha1) + (h / p.r) * z -
           legacy_gain_flow(p, q, B);
}

double earmarked_w_z(double z, const EarmarkedPredeterminedSolution& sol,
                     const ModelParams& p, const DerivedConstants& dc,
                     double /*q*/, double B) {
    if (!(z > 0.0)) {
        throw Error(ErrorCode::DomainError,
                    "earmarked_w_z: z must be positive");
    }
    if (z <= sol.b_bar) return 0.0;
    const double h = p.m * B;
    return sol.C1_bar * dc.alpha1 * std::pow(z, dc.alpha1 - 1.0) + h / p.r;
}

double threshold_L(const ModelParams& p, double q) {
    if (!(q > 0.0)) {
        throw Error(ErrorCode::DomainError,
                    "threshold_L: reserved amount q must be positive");
    }
    return std::pow(q, -p.gamma) * std::pow(p.l, 1.0 - p.gamma) * p.r /
           (p.rho + p.m);
}

TildeU tilde_u(double z, const ModelParams& p, double q) {
    if (!(z > 0.0)) {
        throw Error(ErrorCode::DomainError, "tilde_u: z must be positive");
    }
    const double L = threshold_L(p, q);
    TildeU out;
    if (z >= L) {
        out.value = p.m * crra_u(p.l * q, p.gamma) / (p.rho + p.m);
        out.bequest = 0.0;
        return out;
    }
    const double g = p.gamma;
    const double C = p.m * std::pow(p.l, (1.0 - g) / g) * (g / (1.0 - g)) *
                     std::pow(p.r, (1.0 - g) / g) *
                     std::pow(p.rho + p.m, -1.0 / g);
    out.value = C * std::pow(z, (g - 1.0) / g) + z * p.m * q / p.r;
    out.bequest = std::pow(z * (p.rho + p.m) / p.r, -1.0 / g) *
                      std::pow(p.l, (1.0 - g) / g) -
                  q;
    return out;
}

namespace {

// Coefficients and residual machinery for the four smooth-fit conditions.
// For a fixed candidate threshold bt the two conditions at bt (value and
// slope both zero) are linear in (A1, A2); the slope-matching condition at
// L_bar then determines B1, leaving the value-matching condition at L_bar as
// a scalar residual in bt.
struct FitContext {
    double a1, a2;   // homogeneous exponents
    double g;        // gamma
    double C;        // legacy-flow coefficient
    double L;        // payout shutoff threshold
    double muq;      // m u(q) / (rho + m)
    double Delta;    // m [u(q) - u(l q)] / (rho + m)
};

struct FitCoeffs {
    double A1, A2, B1;
};

FitCoeffs coeffs_for(double bt, const FitContext& c) {
    // 2x2 system at bt:
    //   A1 bt^{a1}        + A2 bt^{a2}        = C bt^{(g-1)/g}       - muq
    //   A1 a1 bt^{a1 - 1} + A2 a2 bt^{a2 - 1} = C ((g-1)/g) bt^{-1/g}
    const double e = (c.g - 1.0) / c.g;
    const double m11 = std::pow(bt, c.a1);
    const double m12 = std::pow(bt, c.a2);
    const double m21 = c.a1 * std::pow(bt, c.a1 - 1.0);
    const double m22 = c.a2 * std::pow(bt, c.a2 - 1.0);
    const double r1 = c.C * std::pow(bt, e) - c.muq;
    const double r2 = c.C * e * std::pow(bt, e - 1.0);
    const double det = m11 * m22 - m12 * m21;
    FitCoeffs out;
    out.A1 = (r1 * m22 - r2 * m12) / det;
    out.A2 = (m11 * r2 - m21 * r1) / det;
    // Slope matching at L: B1 a1 L^{a1-1} = A1 a1 L^{a1-1} + A2 a2 L^{a2-1}
    //                                       - C e L^{e-1}
    out.B1 = out.A1 + (out.A2 * c.a2 * std::pow(c.L, c.a2 - 1.0) -
                       c.C * e * std::pow(c.L, e - 1.0)) /
                          (c.a1 * std::pow(c.L, c.a1 - 1.0));
    return out;
}

double third_eq_residual(double bt, const FitContext& c) {
    // Value matching at L:
    //   A1 L^{a1} + A2 L^{a2} + muq - C L^{(g-1)/g} - (B1 L^{a1} + Delta)
    const FitCoeffs f = coeffs_for(bt, c);
    const double e = (c.g - 1.0) / c.g;
    return f.A1 * std::pow(c.L, c.a1) + f.A2 * std::pow(c.L, c.a2) + c.muq -
           c.C * std::pow(c.L, e) - f.B1 * std::pow(c.L, c.a1) - c.Delta;
}

}  // namespace

EarmarkedControlledSolution smooth_fit_solve(const ModelParams& p,
                                             const DerivedConstants& dc,
                                             double q) {
    if (!(q > 0.0)) {
        throw Error(ErrorCode::DomainError,
                    "smooth_fit_solve: reserved amount q must be positive");
    }
    if (!(p.rho + p.m > p.r)) {
        throw Error(ErrorCode::NeedsRhoPlusMGreaterR,
                    "smooth_fit_solve: requires rho + m > r");
    }
    const double g = p.gamma;
    FitContext c;
    c.a1 = dc.alpha1;
    c.a2 = dc.alpha2;
    c.g = g;
    c.L = threshold_L(p, q);
    c.muq = p.m * crra_u(q, g) / (p.rho + p.m);
    c.Delta = p.m * (crra_u(q, g) - crra_u(p.l * q, g)) / (p.rho + p.m);
    c.C = p.m * std::pow(p.l, (1.0 - g) / g) * (g / (1.0 - g)) *
          std::pow(p.r, (1.0 - g) / g) * std::pow(p.rho + p.m, -1.0 / g);

    // Scan log-spaced candidates over (L*1e-6, L) for sign changes of the
    // remaining scalar condition. A healthy parameter set has exactly one.
    const int n_scan = 4000;
    const double lo = c.L * 1e-6;
    const double hi = c.L * (1.0 - 1e-9);
    const double log_lo = std::log(lo);
    const double step = (std::log(hi) - log_lo) / (n_scan - 1);
    std::vector<std::pair<double, double>> brackets;
    double prev_bt = lo;
    double prev_res = third_eq_residual(prev_bt, c);
    for (int i = 1; i < n_scan; ++i) {
        const double bt = std::exp(log_lo + step * i);
        const double res = third_eq_residual(bt, c);
        if (std::isfinite(prev_res) && std::isfinite(res) &&
            ((prev_res < 0.0 && res > 0.0) || (prev_res > 0.0 && res < 0.0))) {
            brackets.emplace_back(prev_bt, bt);
        }
        prev_bt = bt;
        prev_res = res;
    }
    if (brackets.empty()) {
        throw Error(ErrorCode::UnsupportedRegime,
                    "smooth_fit_solve: no threshold candidate below the "
                    "payout shutoff level; parameters outside the supported "
                    "single-threshold regime");
    }
    if (brackets.size() > 1) {
        throw Error(ErrorCode::NoConvergence,
                    "smooth_fit_solve: " + std::to_string(brackets.size()) +
                        " sign changes in the threshold equation; expected "
                        "exactly one");
    }

    // Bisect on the geometric mean; 200 halvings of the log-width is far
    // below double resolution, so the loop exits on the width test.
    double blo = brackets[0].first;
    double bhi = brackets[0].second;
    double flo = third_eq_residual(blo, c);
    for (int i = 0; i < 200; ++i) {
        const double mid = std::sqrt(blo * bhi);
        if (mid <= blo || mid >= bhi) break;
        const double fmid = third_eq_residual(mid, c);
        if (fmid == 0.0) {
            blo = bhi = mid;
            break;
        }
        if ((flo < 0.0) == (fmid < 0.0)) {
            blo = mid;
            flo = fmid;
        } else {
            bhi = mid;
        }
    }

    EarmarkedControlledSolution sol;
    sol.b_tilde = 0.5 * (blo + bhi);
    const FitCoeffs f = coeffs_for(sol.b_tilde, c);
    sol.A1 = f.A1;
    sol.A2 = f.A2;
    sol.B1 = f.B1;
    sol.L_bar = c.L;
    sol.Delta = c.Delta;
    sol.C = c.C;
    sol.q = q;

    // Verification hypotheses. F(z) = m u(q) - K tilde_u(z) + z K m q / r is
    // increasing, so F(b_tilde) <= 0 pins the threshold below the level
    // where stopping beats continuing pointwise; nonnegativity of the delay
    // value is certified on a wide log grid.
    sol.conditions_ok = sol.b_tilde < sol.L_bar;
    if (sol.conditions_ok) {
        const double F = p.m * crra_u(q, g) -
                         dc.K * tilde_u(sol.b_tilde, p, q).value +
                         sol.b_tilde * dc.K * p.m * q / p.r;
        sol.conditions_ok = F <= 0.0;
    }
    if (sol.conditions_ok) {
        const int n_grid = 10000;
        const double glo = std::log(sol.b_tilde * 1e-2);
        const double gstep =
            (std::log(sol.L_bar * 1e2) - glo) / (n_grid - 1);
        for (int i = 0; i < n_grid; ++i) {
            const double z = std::exp(glo + gstep * i);
            // Tolerate rounding-level dips right at the fit points.
            if (tilde_w(z, sol, p, dc) < -1e-12 * (1.0 + std::abs(c.muq))) {
                sol.conditions_ok = false;
                break;
            }
        }
    }
    return sol;
}

double tilde_w(double z, const EarmarkedControlledSolution& sol,
               const ModelParams& p, const DerivedConstants& dc) {
    if (!(z > 0.0)) {
        throw Error(ErrorCode::DomainError, "tilde_w: z must be positive");
    }
    if (z <= sol.b_tilde) return 0.0;
    const double g = p.gamma;
    if (z <= sol.L_bar) {
        return sol.A1 * std::pow(z, dc.alpha1) +
               sol.A2 * std::pow(z, dc.alpha2) +
               p.m * crra_u(sol.q, g) / (p.rho + p.m) -
               sol.C * std::pow(z, (g - 1.0) / g);
    }
    return sol.B1 * std::pow(z, dc.alpha1) + sol.Delta;
}

double tilde_w_z(double z, const EarmarkedControlledSolution& sol,
                 const ModelParams& p, const DerivedConstants& dc) {
    if (!(z > 0.0)) {
        throw Error(ErrorCode::DomainError, "tilde_w_z: z must be positive");
    }
    if (z <= sol.b_tilde) return 0.0;
    const double g = p.gamma;
    if (z <= sol.L_bar) {
        return sol.A1 * dc.alpha1 * std::pow(z, dc.alpha1 - 1.0) +
               sol.A2 * dc.alpha2 * std::pow(z, dc.alpha2 - 1.0) -
               sol.C * ((g - 1.0) / g) * std::pow(z, (g - 1.0) / g - 1.0);
    }
    return sol.B1 * dc.alpha1 * std::pow(z, dc.alpha1 - 1.0);
}

}  // namespace lifeplan
