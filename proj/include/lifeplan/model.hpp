#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lifeplan/errors.hpp"

namespace lifeplan {

// Market, preference, mortality, and income inputs. Defaults are the baseline
// used throughout the bundled configs and tests.
struct ModelParams {
    double mu = 0.05;        // stock drift (1/yr), must exceed r
    double sigma = 0.22;     // stock volatility (1/sqrt(yr), > 0)
    double r = 0.01;         // risk-free rate (1/yr, > 0)
    double rho = 0.01;       // subjective discount rate (1/yr, > 0)
    double gamma = 0.8;      // relative risk aversion (> 0, != 1)
    double mu_y = 0.01;      // labor income growth (1/yr)
    double sigma_y = 0.1;    // labor income volatility (1/sqrt(yr), > 0)
    double l = 0.5;          // bequest weight in the legacy utility (> 0)
    double m = 0.0175;       // force of mortality (1/yr, > 0)
    double bequest_B = 5.0;  // predetermined insurance payout (currency, >= 0)
    double earmark_q = 0.0;  // wealth earmarked for heirs (currency, >= 0)
    double gompertz_a = 0.0; // mortality growth rate (1/yr, >= 0); 0 = constant
    double x0 = 1.0;         // initial wealth (currency)
    double y0 = 1.0;         // initial labor income (currency, > 0)
};

// Constants derived from ModelParams and cached by every solver.
struct DerivedConstants {
    double theta;   // market price of risk (mu - r) / sigma
    double kappa;   // effective income discount r - mu_y + sigma_y * theta
    double K;       // dual decay constant (see derive_constants)
    double alpha1;  // negative root of the characteristic quadratic
    double alpha2;  // root > 1 of the characteristic quadratic
    double h;       // insurance premium rate m * bequest_B
};

// Named diagnostics for validate_assumptions. Reported as codes (not thrown)
// so a caller can surface every violation at once.
enum class ViolationCode {
    SigmaNonPositive,
    SigmaYNonPositive,
    IncomeNonPositive,
    MortalityNonPositive,
    RateNonPositive,
    DiscountNonPositive,
    GammaNonPositive,
    GammaEqualsOne,
    MuNotAboveR,
    KappaNonPositive,       // human capital would be infinite
    DualDecayNonPositive,   // rho + m too small against growth of marginal utility
    RhoPlusMNotAboveR,      // delayed-purchase boundary needs rho + m > r
};

std::string to_string(ViolationCode code);

// CRRA utility u(c) = c^{1-gamma} / (1-gamma). For gamma < 1, u(0) = 0; for
// gamma > 1, u(0) = -infinity (the caller must keep consumption positive).
double crra_u(double c, double gamma);

// Marginal utility u'(c) = c^{-gamma}.
double crra_u_prime(double c, double gamma);

// Inverse marginal utility: the consumption with u'(c) = z, i.e. z^{-1/gamma}.
double crra_marginal_inverse(double z, double gamma);

// Convex conjugate sup_c [u(c) - z c] = (gamma / (1-gamma)) z^{(gamma-1)/gamma}.
double crra_dual_u(double z, double gamma);

// Populates every derived constant. The quadratic
//   (theta^2/2) a^2 + (rho - r + m - theta^2/2) a - (rho + m) = 0
// is solved by computing the larger-magnitude root first and recovering the
// other from the product of roots, avoiding cancellation. K is
//   (1/gamma)(rho + m - r(1-gamma) - ((1-gamma)/(2 gamma)) theta^2),
// the decay rate of discounted marginal-utility moments.
// Throws Error(KappaNonPositive) when r - mu_y + sigma_y*theta <= 0 and
// Error(DomainError) when a basic parameter invariant is violated.
DerivedConstants derive_constants(const ModelParams& p);

// Returns every violated model assumption; empty means the optimization
// problem is well posed. RhoPlusMNotAboveR is reported only for gamma < 1,
// where a delayed purchase (and hence the free boundary) is possible.
std::vector<ViolationCode> validate_assumptions(const ModelParams& p);

// Actuarially balanced premium rate for payout B under constant mortality m.
double premium_rate(double B, double m);

// Present value of future labor income, y / kappa.
double human_capital(double y, const DerivedConstants& dc);

}  // namespace lifeplan
