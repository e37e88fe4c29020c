#include "lifeplan/controlled.hpp"

#include <cmath>

namespace lifeplan {

namespace {

void require_admissible(double x, double y, const DerivedConstants& dc) {
    if (x <= -y / dc.kappa) {
        throw Error(ErrorCode::DomainError,
                    "wealth plus human capital must be positive");
    }
}

}  // namespace

ControlledSolution solve_controlled(const ModelParams& p,
                                    const DerivedConstants& dc) {
    const double g = p.gamma;
    ControlledSolution sol;
    sol.D = 1.0 / dc.K + p.m * std::pow(p.l * p.r, (1.0 - g) / g) *
                             std::pow(p.rho + p.m, -1.0 / g);
    sol.value_coefficient = std::pow(sol.D, g);
    return sol;
}

double bar_u(double z, const ModelParams& p, const DerivedConstants& dc) {
    (void)dc;
    const double g = p.gamma;
    return p.m * std::pow(p.l, (1.0 - g) / g) * g / (1.0 - g) *
           std::pow(p.r, (1.0 - g) / g) * std::pow(p.rho + p.m, -1.0 / g) *
           std::pow(z, (g - 1.0) / g);
}

double bequest_star(double z, const ModelParams& p,
                    const DerivedConstants& dc) {
    (void)dc;
    const double g = p.gamma;
    return std::pow(z * (p.rho + p.m) / p.r, -1.0 / g) *
           std::pow(p.l, (1.0 - g) / g);
}

double z_star_B(double x, double y, const ModelParams& p,
                const DerivedConstants& dc) {
    require_admissible(x, y, dc);
    const ControlledSolution sol = solve_controlled(p, dc);
    return std::pow((y / dc.kappa + x) / sol.D, -p.gamma);
}

PolicyDecision policy_B(double x, double y, const ModelParams& p,
                        const DerivedConstants& dc) {
    require_admissible(x, y, dc);
    const ControlledSolution sol = solve_controlled(p, dc);
    const double g = p.gamma;
    PolicyDecision d;
    d.region = Region::Stop;  // purchase is immediate for every gamma
    d.consumption = (y / dc.kappa + x) / sol.D;
    d.investment = d.consumption * dc.theta / (g * dc.K * p.sigma) -
                   p.sigma_y * y / (dc.kappa * p.sigma);
    d.bequest = d.consumption * std::pow((p.rho + p.m) / p.r, -1.0 / g) *
                std::pow(p.l, (1.0 - g) / g);
    d.z_star = z_star_B(x, y, p, dc);
    return d;
}

double value_B(double x, double y, const ModelParams& p,
               const DerivedConstants& dc) {
    require_admissible(x, y, dc);
    const ControlledSolution sol = solve_controlled(p, dc);
    return sol.value_coefficient *
           std::pow(y / dc.kappa + x, 1.0 - p.gamma) / (1.0 - p.gamma);
}

}  // namespace lifeplan
