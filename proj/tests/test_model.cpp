#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "lifeplan/model.hpp"
#include "oracle/reference_values.hpp"
#include "test_util.hpp"

namespace {

using namespace lifeplan;
namespace ref = lifeplan::oracle;
using testutil::expect_error_code;

bool contains(const std::vector<ViolationCode>& codes, ViolationCode c) {
    return std::find(codes.begin(), codes.end(), c) != codes.end();
}

TEST(Model, DerivedConstantsMatchBaseline) {
    const ModelParams p{};
    const DerivedConstants dc = derive_constants(p);
    EXPECT_REL(dc.theta, ref::kTheta, 1e-13);
    EXPECT_REL(dc.kappa, ref::kKappa, 1e-13);
    EXPECT_REL(dc.K, ref::kBigK, 1e-13);
    EXPECT_REL(dc.alpha1, ref::kAlpha1, 1e-13);
    EXPECT_REL(dc.alpha2, ref::kAlpha2, 1e-13);
    EXPECT_REL(dc.h, ref::kPremium, 1e-13);
}

TEST(Model, CharacteristicRootsSolveTheQuadratic) {
    const ModelParams p{};
    const DerivedConstants dc = derive_constants(p);
    const double qa = 0.5 * dc.theta * dc.theta;
    const double qb = p.rho - p.r + p.m - qa;
    const double qc = -(p.rho + p.m);
    auto poly = [&](double a) { return qa * a * a + qb * a + qc; };
    EXPECT_NEAR(poly(dc.alpha1), 0.0, 1e-14);
    EXPECT_NEAR(poly(dc.alpha2), 0.0, 1e-14);
    EXPECT_LT(dc.alpha1, 0.0);
    EXPECT_GT(dc.alpha2, 1.0);
    // Vieta: the product of roots is qc / qa.
    EXPECT_REL(dc.alpha1 * dc.alpha2, qc / qa, 1e-12);
}

TEST(Model, CharacteristicRootsIndependentOfRiskAversion) {
    ModelParams p{};
    const DerivedConstants base = derive_constants(p);
    for (const double g : {0.5, 0.9, 1.8, 2.5}) {
        p.gamma = g;
        const DerivedConstants dc = derive_constants(p);
        // The quadratic has no gamma in it, so the roots are bit-identical.
        EXPECT_DOUBLE_EQ(dc.alpha1, base.alpha1) << "gamma=" << g;
        EXPECT_DOUBLE_EQ(dc.alpha2, base.alpha2) << "gamma=" << g;
    }
}

TEST(Model, UtilityIdentities) {
    for (const double g : {0.5, 0.8, 1.8}) {
        for (const double c : {0.3, 1.0, 4.0}) {
            EXPECT_REL(crra_u_prime(c, g), std::pow(c, -g), 1e-14);
            // Inverse marginal utility round-trips.
            EXPECT_REL(crra_marginal_inverse(crra_u_prime(c, g), g), c, 1e-12);
        }
        for (const double z : {0.3, 1.0, 2.5}) {
            // The conjugate value is attained at c = z^{-1/gamma}.
            const double c_star = crra_marginal_inverse(z, g);
            EXPECT_REL(crra_dual_u(z, g), crra_u(c_star, g) - z * c_star,
                       1e-12);
            // And dominates every other consumption choice.
            for (const double c : {0.5 * c_star, 2.0 * c_star}) {
                EXPECT_GT(crra_dual_u(z, g), crra_u(c, g) - z * c);
            }
        }
    }
}

TEST(Model, LegacyUtilityBaselineAnchor) {
    const ModelParams p{};
    EXPECT_REL(crra_u(p.l * p.bequest_B, p.gamma), ref::kULB, 1e-13);
}

TEST(Model, PremiumRateAndHumanCapital) {
    const ModelParams p{};
    const DerivedConstants dc = derive_constants(p);
    EXPECT_DOUBLE_EQ(premium_rate(p.bequest_B, p.m), 0.0875);
    EXPECT_DOUBLE_EQ(dc.h, premium_rate(p.bequest_B, p.m));
    EXPECT_REL(human_capital(1.0, dc), 55.0, 1e-12);
    EXPECT_REL(human_capital(2.0, dc), 110.0, 1e-12);
}

TEST(Model, ValidateAcceptsBaseline) {
    EXPECT_TRUE(validate_assumptions(ModelParams{}).empty());
}

TEST(Model, ValidateFlagsEachViolation) {
    {
        ModelParams p{};
        p.sigma = 0.0;
        const auto codes = validate_assumptions(p);
        ASSERT_EQ(codes.size(), 1u);
        EXPECT_EQ(codes[0], ViolationCode::SigmaNonPositive);
    }
    {
        ModelParams p{};
        p.sigma_y = -0.1;
        EXPECT_TRUE(contains(validate_assumptions(p),
                             ViolationCode::SigmaYNonPositive));
    }
    {
        ModelParams p{};
        p.y0 = 0.0;
        const auto codes = validate_assumptions(p);
        ASSERT_EQ(codes.size(), 1u);
        EXPECT_EQ(codes[0], ViolationCode::IncomeNonPositive);
    }
    {
        ModelParams p{};
        p.m = 0.0;
        EXPECT_TRUE(contains(validate_assumptions(p),
                             ViolationCode::MortalityNonPositive));
    }
    {
        ModelParams p{};
        p.r = 0.0;
        const auto codes = validate_assumptions(p);
        ASSERT_EQ(codes.size(), 1u);
        EXPECT_EQ(codes[0], ViolationCode::RateNonPositive);
    }
    {
        ModelParams p{};
        p.rho = 0.0;
        const auto codes = validate_assumptions(p);
        ASSERT_EQ(codes.size(), 1u);
        EXPECT_EQ(codes[0], ViolationCode::DiscountNonPositive);
    }
    {
        ModelParams p{};
        p.gamma = 0.0;
        const auto codes = validate_assumptions(p);
        ASSERT_EQ(codes.size(), 1u);
        EXPECT_EQ(codes[0], ViolationCode::GammaNonPositive);
    }
    {
        ModelParams p{};
        p.gamma = 1.0;
        const auto codes = validate_assumptions(p);
        ASSERT_EQ(codes.size(), 1u);
        EXPECT_EQ(codes[0], ViolationCode::GammaEqualsOne);
    }
    {
        ModelParams p{};
        p.mu = 0.005;  // below r
        EXPECT_TRUE(
            contains(validate_assumptions(p), ViolationCode::MuNotAboveR));
    }
    {
        ModelParams p{};
        p.mu_y = 0.2;  // income grows faster than the effective discount
        const auto codes = validate_assumptions(p);
        ASSERT_EQ(codes.size(), 1u);
        EXPECT_EQ(codes[0], ViolationCode::KappaNonPositive);
    }
    {
        ModelParams p{};
        p.rho = 0.004;
        p.m = 0.0019;  // marginal-utility growth outruns the discount
        EXPECT_TRUE(contains(validate_assumptions(p),
                             ViolationCode::DualDecayNonPositive));
    }
}

TEST(Model, DelayedPurchaseRequirementOnlyBitesBelowGammaOne) {
    ModelParams p{};
    p.rho = 0.005;
    p.m = 0.004;  // rho + m = 0.009 < r = 0.01
    p.gamma = 0.8;
    EXPECT_TRUE(contains(validate_assumptions(p),
                         ViolationCode::RhoPlusMNotAboveR));
    p.gamma = 1.8;  // immediate purchase: the boundary requirement is moot
    EXPECT_TRUE(validate_assumptions(p).empty());
}

TEST(Model, ViolationMessagesAreDistinct) {
    const std::vector<ViolationCode> all = {
        ViolationCode::SigmaNonPositive,   ViolationCode::SigmaYNonPositive,
        ViolationCode::IncomeNonPositive,  ViolationCode::MortalityNonPositive,
        ViolationCode::RateNonPositive,    ViolationCode::DiscountNonPositive,
        ViolationCode::GammaNonPositive,   ViolationCode::GammaEqualsOne,
        ViolationCode::MuNotAboveR,        ViolationCode::KappaNonPositive,
        ViolationCode::DualDecayNonPositive,
        ViolationCode::RhoPlusMNotAboveR};
    std::set<std::string> seen;
    for (const auto code : all) {
        const std::string s = to_string(code);
        EXPECT_FALSE(s.empty());
        EXPECT_TRUE(seen.insert(s).second) << "duplicate message: " << s;
    }
}

TEST(Model, DeriveConstantsRejectsBadInputs) {
    {
        ModelParams p{};
        p.mu = 0.005;  // mu <= r is a basic invariant
        expect_error_code([&] { return derive_constants(p); },
                          ErrorCode::DomainError);
    }
    {
        ModelParams p{};
        p.gamma = 1.0;
        expect_error_code([&] { return derive_constants(p); },
                          ErrorCode::DomainError);
    }
    {
        ModelParams p{};
        p.mu_y = 0.2;  // kappa <= 0: infinite human capital
        expect_error_code([&] { return derive_constants(p); },
                          ErrorCode::KappaNonPositive);
    }
}

}  // namespace
