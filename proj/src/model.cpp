#include "lifeplan/model.hpp"

#include <cmath>

namespace lifeplan {

std::string to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::KappaNonPositive: return "KappaNonPositive";
        case ErrorCode::NeedsRhoPlusMGreaterR: return "NeedsRhoPlusMGreaterR";
        case ErrorCode::ImmediatePurchase: return "ImmediatePurchase";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::NoRoot: return "NoRoot";
        case ErrorCode::AdmissibilityViolated: return "AdmissibilityViolated";
        case ErrorCode::DegenerateBoundary: return "DegenerateBoundary";
        case ErrorCode::UnsupportedRegime: return "UnsupportedRegime";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NonFiniteUtility: return "NonFiniteUtility";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "UnknownError";
}

std::string to_string(ViolationCode code) {
    switch (code) {
        case ViolationCode::SigmaNonPositive:
            return "sigma must be positive";
        case ViolationCode::SigmaYNonPositive:
            return "sigma_y must be positive";
        case ViolationCode::IncomeNonPositive:
            return "y0 must be positive";
        case ViolationCode::MortalityNonPositive:
            return "m must be positive";
        case ViolationCode::RateNonPositive:
            return "r must be positive";
        case ViolationCode::DiscountNonPositive:
            return "rho must be positive";
        case ViolationCode::GammaNonPositive:
            return "gamma must be positive";
        case ViolationCode::GammaEqualsOne:
            return "gamma = 1 (log utility) is not supported";
        case ViolationCode::MuNotAboveR:
            return "mu must exceed r";
        case ViolationCode::KappaNonPositive:
            return "r - mu_y + sigma_y*theta must be positive (finite human capital)";
        case ViolationCode::DualDecayNonPositive:
            return "rho + m must exceed (1-gamma) r + ((1-gamma)/(2 gamma)) theta^2";
        case ViolationCode::RhoPlusMNotAboveR:
            return "rho + m must exceed r for a delayed purchase to be optimal";
    }
    return "unknown violation";
}

double crra_u(double c, double gamma) {
    return std::pow(c, 1.0 - gamma) / (1.0 - gamma);
}

double crra_u_prime(double c, double gamma) { return std::pow(c, -gamma); }

double crra_marginal_inverse(double z, double gamma) {
    return std::pow(z, -1.0 / gamma);
}

double crra_dual_u(double z, double gamma) {
    return gamma / (1.0 - gamma) * std::pow(z, (gamma - 1.0) / gamma);
}

DerivedConstants derive_constants(const ModelParams& p) {
    if (p.sigma <= 0.0 || p.sigma_y <= 0.0 || p.y0 <= 0.0 || p.m <= 0.0 ||
        p.gamma <= 0.0 || p.gamma == 1.0 || p.mu <= p.r || p.r <= 0.0 ||
        p.rho <= 0.0) {
        throw Error(ErrorCode::DomainError,
                    "model parameters violate a basic invariant; run validation "
                    "for the full list");
    }

    DerivedConstants dc{};
    dc.theta = (p.mu - p.r) / p.sigma;
    dc.kappa = p.r - p.mu_y + p.sigma_y * dc.theta;
    if (dc.kappa <= 0.0) {
        throw Error(ErrorCode::KappaNonPositive,
                    "effective income discount is non-positive; human capital "
                    "would be infinite");
    }

    const double g = p.gamma;
    dc.K = (p.rho + p.m - p.r * (1.0 - g) -
            (1.0 - g) / (2.0 * g) * dc.theta * dc.theta) / g;

    // Quadratic (theta^2/2) a^2 + qb a - (rho+m) = 0. The constant term is
    // negative, so the roots straddle zero; the stable formula computes the
    // root that adds |qb| and |sqrt(disc)| first and gets the other one from
    // the product of roots -(rho+m)/(theta^2/2).
    const double qa = 0.5 * dc.theta * dc.theta;
    const double qb = p.rho - p.r + p.m - qa;
    const double qc = -(p.rho + p.m);
    const double disc = qb * qb - 4.0 * qa * qc;
    const double sq = std::sqrt(disc);
    const double big = (qb >= 0.0) ? (-qb - sq) / (2.0 * qa)
                                   : (-qb + sq) / (2.0 * qa);
    const double other = qc / (qa * big);
    dc.alpha1 = std::min(big, other);
    dc.alpha2 = std::max(big, other);

    dc.h = premium_rate(p.bequest_B, p.m);
    return dc;
}

std::vector<ViolationCode> validate_assumptions(const ModelParams& p) {
    std::vector<ViolationCode> out;
    if (p.sigma <= 0.0) out.push_back(ViolationCode::SigmaNonPositive);
    if (p.sigma_y <= 0.0) out.push_back(ViolationCode::SigmaYNonPositive);
    if (p.y0 <= 0.0) out.push_back(ViolationCode::IncomeNonPositive);
    if (p.m <= 0.0) out.push_back(ViolationCode::MortalityNonPositive);
    if (p.r <= 0.0) out.push_back(ViolationCode::RateNonPositive);
    if (p.rho <= 0.0) out.push_back(ViolationCode::DiscountNonPositive);
    if (p.gamma <= 0.0) out.push_back(ViolationCode::GammaNonPositive);
    if (p.gamma == 1.0) out.push_back(ViolationCode::GammaEqualsOne);
    if (p.mu <= p.r) out.push_back(ViolationCode::MuNotAboveR);

    // The remaining checks need theta; skip them if sigma is unusable.
    if (p.sigma <= 0.0 || p.gamma <= 0.0 || p.gamma == 1.0) return out;

    const double theta = (p.mu - p.r) / p.sigma;
    if (p.r - p.mu_y + p.sigma_y * theta <= 0.0) {
        out.push_back(ViolationCode::KappaNonPositive);
    }
    const double g = p.gamma;
    if (p.rho + p.m <=
        (1.0 - g) * p.r + (1.0 - g) / (2.0 * g) * theta * theta) {
        out.push_back(ViolationCode::DualDecayNonPositive);
    }
    // Only a gamma < 1 agent ever delays the purchase; the boundary (and its
    // rho + m > r requirement) is moot otherwise.
    if (g < 1.0 && p.rho + p.m <= p.r) {
        out.push_back(ViolationCode::RhoPlusMNotAboveR);
    }
    return out;
}

double premium_rate(double B, double m) { return m * B; }

double human_capital(double y, const DerivedConstants& dc) {
    if (dc.kappa <= 0.0) {
        throw Error(ErrorCode::KappaNonPositive,
                    "effective income discount is non-positive");
    }
    return y / dc.kappa;
}

}  // namespace lifeplan
