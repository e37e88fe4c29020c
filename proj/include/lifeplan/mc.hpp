#pragma once

#include <cstdint>
#include <vector>

#include "lifeplan/model.hpp"
#include "lifeplan/simulate.hpp"

namespace lifeplan {

// Monte Carlo valuation of purchase plans, used as an independent check of
// the closed-form value functions. Every plan below consumes c = Z^{-1/gamma}
// along the shadow-price process Z; the plans differ only in when the policy
// is bought and what legacy-utility flows apply before/after purchase, so a
// single simulated factor Z_t / Z_0 prices every request on common random
// numbers.

enum class PlanKind {
    PredeterminedThreshold,  // fixed payout B, bought when Z first <= b
    NeverPurchase,           // no insurance ever
    ControlledImmediate,     // payout chosen optimally, bought at time 0
    EarmarkedThreshold,      // reserved q plus fixed payout B, threshold rule
};

struct PolicyPlan {
    PlanKind kind = PlanKind::PredeterminedThreshold;
    // Multiplies the optimal threshold; != 1 probes deliberately suboptimal
    // rules. The start point is re-solved from the shifted plan's own budget
    // (consumption plus the premium annuity from the first crossing), so the
    // perturbed plan spends exactly the same initial wealth. Ignored by
    // plans without a threshold.
    double threshold_scale = 1.0;
};

struct PlanValueRequest {
    PolicyPlan plan;
    double x = 1.0;
    double y = 1.0;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample std / sqrt(#independent samples)
    long n_paths = 0;
    double horizon_T = 0.0;
    std::uint64_t seed = 0;
    // Bound on contributions omitted beyond the horizon. The consumption
    // tail and the not-yet-purchased bequest tail are both added in closed
    // form conditional on the path endpoint, so truncation contributes 0
    // here; time-discretization error is separate and shrinks with dt.
    double tail_bound = 0.0;
    long admissibility_violations = 0;  // wealth-floor breaches (primal runs)
};

// Values every request on one set of common-random-number paths.
// sim.horizon_T and sim.dt are ignored: valuation uses a dedicated grid
// (monthly to 50 yr, then geometrically stretched) chosen so that the
// closed-form tails take over where the discount is small. When `per_path`
// is non-null it receives, per request, one value per independent sample
// (per antithetic pair when sim.antithetic), enabling paired difference
// tests. Throws ConfigError for age-dependent mortality (gompertz_a != 0)
// and DomainError for plans that are ill-posed at the given parameters.
std::vector<McEstimate> mc_value_batch(
    const std::vector<PlanValueRequest>& requests, const ModelParams& p,
    const DerivedConstants& dc, const SimConfig& sim,
    std::vector<std::vector<double>>* per_path = nullptr);

// Single-request convenience wrapper.
McEstimate mc_value(const PolicyPlan& plan, double x, double y,
                    const ModelParams& p, const DerivedConstants& dc,
                    const SimConfig& sim);

// Checks the static budget constraint under the optimal fixed-payout plan:
// E[xi_T X_T + integral_0^T xi_t (c_t + h 1{bought} - Y_t) dt] = x for any
// horizon, because the bracketed process is a martingale stopped at the
// purchase time. Returns the estimate of the left side (mean should match x
// within noise). Wealth along the path comes from the closed-form map, and
// the wealth floor -Y/kappa is monitored (violations counted).
McEstimate budget_identity(double x, double y, const ModelParams& p,
                           const DerivedConstants& dc, const SimConfig& sim);

struct PairedDiff {
    double mean = 0.0;
    double std_error = 0.0;
};

// Optimal threshold vs shifted thresholds vs never purchasing, on common
// random numbers. All differences should be >= 0 up to noise if the
// unshifted threshold is indeed optimal.
struct PerturbationReport {
    McEstimate optimal;
    McEstimate lower;   // threshold * (1 - shift)
    McEstimate upper;   // threshold * (1 + shift)
    McEstimate never;
    PairedDiff opt_minus_lower;
    PairedDiff opt_minus_upper;
    PairedDiff opt_minus_never;
};

PerturbationReport perturbation_test(double x, double y, const ModelParams& p,
                                     const DerivedConstants& dc,
                                     const SimConfig& sim, double shift);

}  // namespace lifeplan
