#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ivobs;

namespace {

const EpidemicParams kParams = fixtures::reference_params();
const GainHyperParams kGains = fixtures::default_gains();

/// Envelope whose beta_hv_hi is 0.11 and beta_vh bounds follow the seasonal value at t = 0.
ConstantEnvelope hv_upper_011()
{
    auto r = fixtures::seasonal()(0.0);
    r.beta_hv_hi = 0.11;
    return {r};
}

ObserverPairState pair(double S_lo, double I_h_hi, double I_v_hi, double S_hi, double I_h_lo = 0.0,
                       double I_v_lo = 0.0)
{
    return {{S_lo, I_h_hi, I_v_hi}, {S_hi, I_h_lo, I_v_lo}};
}

} // namespace

TEST(XiTargets, SecondBranchOnlyWhenUpperVectorEstimateVanishes)
{
    const auto xi = xi_targets(pair(0.1, 0.01, 0.0, 0.8), 0.0, kParams, hv_upper_011(), kGains);
    EXPECT_NEAR(xi.xi1, (0.025 - 3.4e-5 + 0.0011) / 8e-6, 1e-9);
    EXPECT_NEAR(xi.xi1, 3258.25, 0.1);
    EXPECT_EQ(xi.xi1_Iv, 0.0);
}

TEST(XiTargets, BothBranches)
{
    const auto xi = xi_targets(pair(0.1, 0.01, 0.01, 0.8), 0.0, kParams, hv_upper_011(), kGains);
    const double first = (0.14 - 1e-4) / 0.01;
    const double second = (0.025 - 3.4e-5 + 0.0011) / (8e-6 + 0.01);
    EXPECT_NEAR(first, 13.99, 1e-12);
    EXPECT_DOUBLE_EQ(xi.xi1, second);
    EXPECT_NEAR(xi.xi1, 2.6045, 1e-4);
    EXPECT_NEAR(xi.xi1_Iv, second * 0.01, 1e-15);
}

TEST(XiTargets, GammaBranchWinsAtLargeVectorEstimate)
{
    auto env = hv_upper_011();
    env.rates.beta_hv_hi = 1e6;
    const auto xi = xi_targets(pair(0.1, 0.5, 0.9, 0.8), 0.0, kParams, env, kGains);
    EXPECT_DOUBLE_EQ(xi.xi1, (0.14 - 1e-4) / 0.9);
    EXPECT_DOUBLE_EQ(xi.xi1_Iv, 0.14 - 1e-4);
}

TEST(XiTargets, DegenerateWhenEverythingVanishes)
{
    EXPECT_THROW(xi_targets(pair(0.0, 0.0, 0.0, 0.0), 0.0, kParams, hv_upper_011(), kGains), DegenerateState);
}

TEST(ScheduleGains, UnguardedGainsClosePrimaryConstraint)
{
    const auto env = fixtures::seasonal();
    const auto obs = pair(0.1, 0.01, 0.01, 0.8);
    const auto s = schedule_gains(obs, 2.102e-4, 0.0, kParams, env, kGains);
    EXPECT_NEAR(env(0.0).beta_vh_hi, 0.323708, 1e-12);
    EXPECT_DOUBLE_EQ(s.gains.k_S_lo, s.xi.xi1 / 0.323708);
    EXPECT_EQ(s.gains.k_v_hi, 0.0);
    EXPECT_EQ(s.gains.k_v_lo, 0.0);
    EXPECT_FALSE(s.guard_lo);
    EXPECT_FALSE(s.guard_hi);
    const auto res = gain_constraint_residuals(s.gains, s.xi, env(0.0), kGains);
    EXPECT_LE(std::abs(res.obs1), 1e-12);
    EXPECT_LE(std::abs(res.obs2), 1e-12);
}

TEST(ScheduleGains, HandComputedLowerGain)
{
    // xi1 = 2.6045 and beta_vh_hi(0) = 0.323708 give k_S_lo ~ 8.046.
    const auto env = hv_upper_011();
    const auto s = schedule_gains(pair(0.1, 0.01, 0.01, 0.8), 0.0, 0.0, kParams, env, kGains);
    EXPECT_NEAR(s.gains.k_S_lo, 8.046, 1e-3);
    EXPECT_EQ(s.gains.k_v_hi, 0.0);
}

TEST(ScheduleGains, FloorGuardRaisesGainAndActivatesVectorInjection)
{
    const auto env = fixtures::seasonal();
    const auto r = env(0.0);
    const double y = 1.0;
    const auto obs = pair(5e-6, 0.01, 1.0, 0.8);
    const auto s = schedule_gains(obs, y, 0.0, kParams, env, kGains);
    const double floor_gain = 1.0 - (kParams.mu_h - kGains.eps1) / y;
    ASSERT_GT(floor_gain, s.xi.xi1 / r.beta_vh_hi);
    EXPECT_TRUE(s.guard_lo);
    EXPECT_DOUBLE_EQ(s.gains.k_S_lo, floor_gain);
    EXPECT_GT(s.gains.k_v_hi, 0.0);
    EXPECT_NEAR(s.gains.k_v_hi, (floor_gain * r.beta_vh_hi - s.xi.xi1) / (kGains.omega1 * r.beta_vh_lo), 1e-15);

    const auto res = gain_constraint_residuals(s.gains, s.xi, r, kGains);
    EXPECT_LE(std::abs(res.obs1), 1e-12);
    EXPECT_TRUE(check_hyp_kS(s.gains, obs, y, kParams, kGains).ok());
}

TEST(ScheduleGains, VanishingLowerRateIsInfeasible)
{
    auto rates = fixtures::seasonal()(0.0);
    rates.beta_vh_lo = 0.0;
    const ConstantEnvelope env{rates};
    EXPECT_THROW(schedule_gains(pair(0.1, 0.01, 0.01, 0.8), 0.0, 0.0, kParams, env, kGains), InfeasibleGain);
}

TEST(ScheduleGains, RejectsNegativeIncidence)
{
    EXPECT_THROW(schedule_gains(pair(0.1, 0.01, 0.01, 0.8), -1.0, 0.0, kParams, fixtures::seasonal(), kGains),
                 InvalidInput);
}

TEST(HypKS, Examples)
{
    const GainValues unit{1.0, 0.0, 1.0, 0.0};
    EXPECT_TRUE(check_hyp_kS(unit, pair(0.5, 0.0, 0.0, 0.9), 0.3, kParams, kGains).ok());
    EXPECT_TRUE(check_hyp_kS(unit, pair(1e-6, 0.0, 0.0, 1e-6), 0.3, kParams, kGains).ok());
    GainHyperParams strict = kGains;
    strict.eps1 = 5e-5;
    EXPECT_FALSE(check_hyp_kS(unit, pair(1e-6, 0.0, 0.0, 1e-6), 0.3, kParams, strict).ok());
    const GainValues any{123.0, 0.0, 0.5, 0.0};
    EXPECT_TRUE(check_hyp_kS(any, pair(1e-6, 0.0, 0.0, 1e-6), 0.0, kParams, kGains).ok());
    const GainValues weak{0.0, 0.0, 0.0, 0.0};
    EXPECT_FALSE(check_hyp_kS(weak, pair(1e-6, 0.0, 0.0, 0.9), 1.0, kParams, kGains).obs1);
}

TEST(ObserverDynamics, DiseaseFreeFixedPoint)
{
    const GainValues zero{};
    const auto env = fixtures::seasonal();
    const Vec3 d1 = obs1_dynamics({1.0, 0.0, 0.0}, 0.0, 3.0, kParams, env, zero);
    const Vec3 d2 = obs2_dynamics({1.0, 0.0, 0.0}, 0.0, 3.0, kParams, env, zero);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(d1[i], 0.0);
        EXPECT_EQ(d2[i], 0.0);
    }
}

TEST(ObserverDynamics, SaturatedVectorEstimate)
{
    const GainValues zero{};
    const auto env = fixtures::seasonal();
    EXPECT_DOUBLE_EQ(obs1_dynamics({0.5, 0.0, 1.0}, 0.0, 0.0, kParams, env, zero)[2], -kParams.mu_v);
    EXPECT_DOUBLE_EQ(obs2_dynamics({0.5, 0.0, 1.0}, 0.0, 0.0, kParams, env, zero)[2], -kParams.mu_v);
}

TEST(ObserverDynamics, PerfectKnowledgeReproducesPlant)
{
    const auto env = fixtures::seasonal(0.0);
    const HostVectorState x{0.3, 0.05, 0.02};
    const double y = incidence_output(x, 10.0, env);
    const GainValues g{7.0, 0.3, 2.0, 0.4};
    const Vec3 plant = reduced_dynamics(x, 10.0, kParams, env);
    const Vec3 d1 = obs1_dynamics({x.S_h, x.I_h, x.I_v}, y, 10.0, kParams, env, g);
    const Vec3 d2 = obs2_dynamics({x.S_h, x.I_h, x.I_v}, y, 10.0, kParams, env, g);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(d1[i], plant[i], 1e-17);
        EXPECT_NEAR(d2[i], plant[i], 1e-17);
    }
}

TEST(GainHyperParams, Validation)
{
    EXPECT_NO_THROW(kGains.validate(kParams));
    GainHyperParams bad = kGains;
    bad.eps1 = 1e-4; // above mu_h
    EXPECT_THROW(bad.validate(kParams), InvalidInput);
    bad = kGains;
    bad.eps_obs1 = 0.2; // above gamma
    EXPECT_THROW(bad.validate(kParams), InvalidInput);
    bad = kGains;
    bad.omega2 = 0.0;
    EXPECT_THROW(bad.validate(kParams), InvalidInput);
}
