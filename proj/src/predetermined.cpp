#include "lifeplan/predetermined.hpp"

#include <cmath>

#include "lifeplan/rootfind.hpp"

namespace lifeplan {

namespace {

// Perpetual value of the legacy-utility flow once insured: m u(lB) / (rho+m).
double legacy_flow_value(const ModelParams& p) {
    return p.m * crra_u(p.l * p.bequest_B, p.gamma) / (p.rho + p.m);
}

bool in_stop_region(double x, double y, const PredeterminedSolution& sol,
                    const ModelParams& p, const DerivedConstants& dc) {
    if (sol.immediate_purchase) return true;
    return x >= primal_boundary(y, sol, p, dc);
}

}  // namespace

PredeterminedSolution solve(const ModelParams& p, const DerivedConstants& dc) {
    if (p.bequest_B <= 0.0) {
        throw Error(ErrorCode::DomainError,
                    "the fixed payout B must be positive");
    }
    PredeterminedSolution sol;
    if (p.gamma > 1.0) {
        // Dying uninsured carries unbounded disutility; waiting never pays.
        sol.immediate_purchase = true;
        return sol;
    }
    if (p.rho + p.m <= p.r) {
        throw Error(ErrorCode::NeedsRhoPlusMGreaterR,
                    "delayed purchase requires rho + m > r");
    }
    sol.b = legacy_flow_value(p) * p.r * dc.alpha1 /
            (dc.h * (dc.alpha1 - 1.0));
    sol.C1 = -(dc.h / (p.r * dc.alpha1)) * std::pow(sol.b, 1.0 - dc.alpha1);
    return sol;
}

double dual_w_hat(double z, const PredeterminedSolution& sol,
                  const ModelParams& p, const DerivedConstants& dc) {
    if (z <= sol.b) return 0.0;
    return sol.C1 * std::pow(z, dc.alpha1) + dc.h / p.r * z -
           legacy_flow_value(p);
}

double dual_w_hat_z(double z, const PredeterminedSolution& sol,
                    const ModelParams& p, const DerivedConstants& dc) {
    if (z <= sol.b) return 0.0;
    return sol.C1 * dc.alpha1 * std::pow(z, dc.alpha1 - 1.0) + dc.h / p.r;
}

double dual_v(double z, double y, const PredeterminedSolution& sol,
              const ModelParams& p, const DerivedConstants& dc) {
    if (z <= 0.0 || y <= 0.0) {
        throw Error(ErrorCode::DomainError, "dual_v requires z > 0, y > 0");
    }
    const double common = crra_dual_u(z, p.gamma) / dc.K + z * y / dc.kappa;
    if (!sol.immediate_purchase && z > sol.b) {
        return sol.C1 * std::pow(z, dc.alpha1) + common;
    }
    return common - dc.h / p.r * z + legacy_flow_value(p);
}

double dual_v_z(double z, double y, const PredeterminedSolution& sol,
                const ModelParams& p, const DerivedConstants& dc) {
    if (z <= 0.0 || y <= 0.0) {
        throw Error(ErrorCode::DomainError, "dual_v_z requires z > 0, y > 0");
    }
    const double common =
        -std::pow(z, -1.0 / p.gamma) / dc.K + y / dc.kappa;
    if (!sol.immediate_purchase && z > sol.b) {
        return sol.C1 * dc.alpha1 * std::pow(z, dc.alpha1 - 1.0) + common;
    }
    return common - dc.h / p.r;
}

double z_star(double x, double y, const PredeterminedSolution& sol,
              const ModelParams& p, const DerivedConstants& dc) {
    if (x <= -y / dc.kappa) {
        throw Error(ErrorCode::DomainError,
                    "wealth plus human capital must be positive");
    }
    if (in_stop_region(x, y, sol, p, dc)) {
        const double net = x - dc.h / p.r + y / dc.kappa;
        if (net <= 0.0) {
            throw Error(ErrorCode::AdmissibilityViolated,
                        "insured-region wealth floor x + y/kappa > h/r "
                        "violated");
        }
        return std::pow(net * dc.K, -p.gamma);
    }

    // Waiting region: solve C1 a1 z^{a1-1} - z^{-1/g}/K + y/kappa + x = 0.
    // The left side is strictly increasing in z, negative at b+ (that is
    // exactly x < b_hat(y)), so an upward geometric search brackets the root.
    const double inv_g = 1.0 / p.gamma;
    auto f = [&](double z) {
        return sol.C1 * dc.alpha1 * std::pow(z, dc.alpha1 - 1.0) -
               std::pow(z, -inv_g) / dc.K + y / dc.kappa + x;
    };
    const double lo0 = sol.b * (1.0 + 1e-12);
    auto [lo, hi] = grow_bracket_up(f, lo0, 2.0);
    if (lo == hi) return lo;

    // Newton on u = log z keeps iterates positive and well scaled.
    auto g = [&](double u) {
        const double z = std::exp(u);
        const double fz = f(z);
        const double dfz = sol.C1 * dc.alpha1 * (dc.alpha1 - 1.0) *
                               std::pow(z, dc.alpha1 - 2.0) +
                           inv_g * std::pow(z, -inv_g - 1.0) / dc.K;
        return ValueSlope{fz, z * dfz};
    };
    const double u = bracketed_newton(g, std::log(lo), std::log(hi), 1e-13,
                                      1e-15);
    return std::exp(u);
}

double primal_boundary(double y, const PredeterminedSolution& sol,
                       const ModelParams& p, const DerivedConstants& dc) {
    if (sol.immediate_purchase) {
        throw Error(ErrorCode::ImmediatePurchase,
                    "no finite wealth threshold: purchase is always optimal");
    }
    return std::pow(sol.b, -1.0 / p.gamma) / dc.K - y / dc.kappa + dc.h / p.r;
}

double value(double x, double y, const PredeterminedSolution& sol,
             const ModelParams& p, const DerivedConstants& dc) {
    if (x <= -y / dc.kappa) {
        throw Error(ErrorCode::DomainError,
                    "wealth plus human capital must be positive");
    }
    const double zs = z_star(x, y, sol, p, dc);
    if (in_stop_region(x, y, sol, p, dc)) {
        const double net = x - dc.h / p.r + y / dc.kappa;
        return std::pow(net, 1.0 - p.gamma) * std::pow(dc.K, -p.gamma) /
                   (1.0 - p.gamma) +
               legacy_flow_value(p);
    }
    return sol.C1 * std::pow(zs, dc.alpha1) +
           crra_dual_u(zs, p.gamma) / dc.K + (y / dc.kappa + x) * zs;
}

PolicyDecision policy(double x, double y, const PredeterminedSolution& sol,
                      const ModelParams& p, const DerivedConstants& dc) {
    PolicyDecision d;
    d.z_star = z_star(x, y, sol, p, dc);
    if (in_stop_region(x, y, sol, p, dc)) {
        const double net = x - dc.h / p.r + y / dc.kappa;
        d.region = Region::Stop;
        d.consumption = dc.K * net;
        d.investment = (dc.theta * net / p.gamma -
                        p.sigma_y * y / dc.kappa) / p.sigma;
        d.bequest = p.bequest_B;
        return d;
    }
    d.region = Region::Continue;
    d.consumption = std::pow(d.z_star, -1.0 / p.gamma);
    d.investment =
        (dc.theta * (sol.C1 * dc.alpha1 * (dc.alpha1 - 1.0) *
                         std::pow(d.z_star, dc.alpha1 - 1.0) +
                     std::pow(d.z_star, -1.0 / p.gamma) / (dc.K * p.gamma)) -
         p.sigma_y * y / dc.kappa) / p.sigma;
    d.bequest = 0.0;
    return d;
}

}  // namespace lifeplan
