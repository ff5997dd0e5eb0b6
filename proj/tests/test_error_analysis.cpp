#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace ivobs;

namespace {

const EpidemicParams kParams = fixtures::reference_params();
const GainHyperParams kGains = fixtures::default_gains();

/// Error derivatives formed directly from the plant and observer right-hand sides.
PerObserver<Vec3> direct_error_rates(const HostVectorState& x, const ObserverPairState& o, const GainValues& g,
                                     double t, const SeasonalEnvelope& env)
{
    const double y = incidence_output(x, t, env);
    const Vec3 f = reduced_dynamics(x, t, kParams, env);
    const Vec3 f1 = obs1_dynamics(o.obs1, y, t, kParams, env, g);
    const Vec3 f2 = obs2_dynamics(o.obs2, y, t, kParams, env, g);
    return {{f[0] - f1[0], f1[1] - f[1], f1[2] - f[2]}, {f2[0] - f[0], f[1] - f2[1], f[2] - f2[2]}};
}

} // namespace

TEST(ErrorSystems, ZeroGainsExactRates)
{
    const auto env = fixtures::seasonal(0.0);
    const HostVectorState x{0.4, 0.1, 0.2};
    std::mt19937_64 rng(7);
    const ObserverPairState o = fixtures::random_bracket(x, rng);
    const auto sys = build_error_systems(x, o, GainValues{}, 0.0,
                                         kParams, env);
    for (const auto* s : {&sys.obs1, &sys.obs2}) {
        EXPECT_EQ(s->A[0][0], -kParams.mu_h);
        EXPECT_EQ(s->max_abs_b(), 0.0);
    }
}

TEST(ErrorSystems, ReproduceDifferenceOfRightHandSides)
{
    std::mt19937_64 rng(11);
    const auto env = fixtures::seasonal(0.1);
    for (int trial = 0; trial < 200; ++trial) {
        const HostVectorState x = fixtures::random_state(rng);
        const ObserverPairState o = fixtures::random_bracket(x, rng);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        const GainValues g{u(rng), u(rng) * 1e-4, u(rng), u(rng) * 1e-4};
        const double t = u(rng) * 36.5;
        const auto sys = build_error_systems(x, o, g, t, kParams, env);
        const auto e = error_vectors(x, o);
        const auto direct = direct_error_rates(x, o, g, t, env);
        const Vec3 m1 = sys.obs1.apply(e.obs1);
        const Vec3 m2 = sys.obs2.apply(e.obs2);
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(m1[i], direct.obs1[i], 1e-12) << "observer 1, row " << i << ", trial " << trial;
            EXPECT_NEAR(m2[i], direct.obs2[i], 1e-12) << "observer 2, row " << i << ", trial " << trial;
        }
    }
}

TEST(ErrorSystems, MatchesFiniteDifferenceOfIntegratedErrors)
{
    const auto env = fixtures::seasonal(0.1);
    const auto init = fixtures::reference_initial();
    const ScheduledGains s = schedule_gains(init.obs, incidence_output(init.truth, 0.0, env), 0.0, kParams, env,
                                            kGains);
    const auto sys = build_error_systems(init.truth, init.obs, s.gains, 0.0, kParams, env);
    const auto e0 = error_vectors(init.truth, init.obs);
    const double h = 1e-6;
    const State9 x1 = advance_coupled(init, 0.0, h, kParams, env, kGains);
    const auto e1 = error_vectors(x1.truth, x1.obs);
    const Vec3 m1 = sys.obs1.apply(e0.obs1);
    const Vec3 fd1{(e1.obs1.e_S - e0.obs1.e_S) / h, (e1.obs1.e_h - e0.obs1.e_h) / h, (e1.obs1.e_v - e0.obs1.e_v) / h};
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(fd1[i], m1[i], 1e-4 * std::max(1.0, std::abs(m1[i])));
    }
}

TEST(LyapunovValues, Examples)
{
    const PerObserver<double> rho{1.54e8, 1.26e8};
    const auto zero = lyapunov_values({{}, {}}, kGains, rho);
    EXPECT_EQ(zero.obs1, 0.0);
    EXPECT_EQ(zero.obs2, 0.0);
    const auto unit = lyapunov_values({{1.0, 0.0, 0.0}, {0.0, 0.0, 2.0}}, kGains, rho);
    EXPECT_EQ(unit.obs1, 1.0);
    EXPECT_EQ(unit.obs2, 2.0 * kGains.omega2);
    const auto mixed = lyapunov_values({{0.0, 1e-3, 0.0}, {0.0, 1e-3, 0.0}}, kGains, rho);
    EXPECT_DOUBLE_EQ(mixed.obs1, 1.54e5);
}

TEST(RhoWeights, SeasonalSupremum)
{
    const auto rho = rho_weights(kGains, fixtures::seasonal(0.1), 1825.0);
    EXPECT_NEAR(rho.obs1, 1.54e8, 1e-3);
    EXPECT_NEAR(rho.obs2, 1e5 * 0.9 * 0.1 * 1.4 / 1e-4, 1e-3);
}

TEST(RhoWeights, ConstantEnvelopeMatchingMarginGivesUnitWeight)
{
    auto r = fixtures::seasonal()(0.0);
    r.beta_hv_hi = kGains.eps_obs1 / kGains.omega1;
    EXPECT_DOUBLE_EQ(rho_weights(kGains, ConstantEnvelope{r}, 100.0).obs1, 1.0);
}

TEST(RhoWeights, ZeroAmplitudeUsesConstantValue)
{
    const SeasonalEnvelope flat{0.2102, 0.1, 0.0, 365.0, 0.1};
    EXPECT_NEAR(rho_weights(kGains, flat, 50.0).obs1, 1e5 * 0.11 / 1e-4, 1e-6);
}

TEST(RhoWeights, DenseGridCatchesInteriorPeaks)
{
    // Analytic supremum is not exposed by this wrapper, so only the grid sees the peak at t = 365.
    struct GridOnly {
        SeasonalEnvelope inner;
        TransmissionRates operator()(double t) const { return inner(t); }
    };
    const GridOnly env{fixtures::seasonal()};
    EXPECT_NEAR(rho_weights(kGains, env, 400.0).obs1, 1.54e8, 1.0);
}

TEST(DeltaRates, Examples)
{
    EXPECT_DOUBLE_EQ(delta_rates(XiTargets{3258.3, 1.0, 0.0, 0.0}, kParams).obs1, kParams.mu_h);
    const PerObserver<double> d = delta_rates(XiTargets{2.6045, 0.0, 2.6045 * 0.01, 0.0}, kParams);
    EXPECT_NEAR(d.obs1, 0.026078, 1e-6);
    const double margin = kParams.gamma - kGains.eps_obs1;
    const auto edge = delta_rates(XiTargets{margin / 0.5, 0.0, margin, 0.0}, kParams);
    EXPECT_DOUBLE_EQ(edge.obs1, kParams.mu_h + kParams.gamma - kGains.eps_obs1);
    EXPECT_LT(edge.obs1, kParams.mu_h + kParams.gamma);
}

TEST(DeltaRates, OutOfRangeIsInconsistent)
{
    EXPECT_THROW(delta_rates(XiTargets{0.0, 0.0, kParams.gamma, 0.0}, kParams), InternalInconsistency);
    EXPECT_THROW(delta_rates(XiTargets{0.0, 0.0, 0.0, -1e-6}, kParams), InternalInconsistency);
}

TEST(DeltaRates, StateOverloadSkipsEmptyChannels)
{
    const ObserverPairState o{{0.1, 0.01, 0.01}, {0.8, 0.0, 0.0}};
    const auto d = delta_rates(2.6045, 1e300, o, kParams);
    EXPECT_NEAR(d.obs1, kParams.mu_h + 0.026045, 1e-12);
    EXPECT_EQ(d.obs2, kParams.mu_h);
}

TEST(ForcingTerms, VanishWithoutUncertaintyOrInfection)
{
    const GainValues g{8.0, 1e-4, 2.0, 1e-4};
    EXPECT_EQ(forcing_terms({0.3, 0.1, 0.2}, g, 0.0, fixtures::seasonal(0.0), kGains).obs1, 0.0);
    const auto none = forcing_terms({0.3, 0.0, 0.0}, g, 0.0, fixtures::seasonal(0.1), kGains);
    EXPECT_EQ(none.obs1, 0.0);
    EXPECT_EQ(none.obs2, 0.0);
}

TEST(ForcingTerms, HandEvaluatedAtStart)
{
    const auto env = fixtures::seasonal(0.1);
    const auto init = fixtures::reference_initial();
    const double y = incidence_output(init.truth, 0.0, env);
    const auto s = schedule_gains(init.obs, y, 0.0, kParams, env, kGains);
    // I_h(0) = 0 and k_v = 0, so only the k_S channel contributes: k_S (beta+ - beta-) S_h I_v.
    const double spread = 0.2 * 0.2102 * 1.4;
    const auto F = forcing_terms(init.truth, s.gains, 0.0, env, kGains);
    EXPECT_NEAR(F.obs1, s.gains.k_S_lo * spread * 0.2 * 0.005, 1e-15);
    EXPECT_NEAR(F.obs2, s.gains.k_S_hi * spread * 0.2 * 0.005, 1e-15);
}

TEST(ForcingTerms, DominateWeightedInput)
{
    std::mt19937_64 rng(3);
    const auto env = fixtures::seasonal(0.1);
    const PerObserver<double> rho = rho_weights(kGains, env, 365.0);
    for (int trial = 0; trial < 500; ++trial) {
        const HostVectorState x = fixtures::random_state(rng);
        const ObserverPairState o = fixtures::random_bracket(x, rng);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        const GainValues g{u(rng), u(rng) * 1e-3, u(rng), u(rng) * 1e-3};
        const double t = u(rng) * 36.5;
        const auto sys = build_error_systems(x, o, g, t, kParams, env);
        const auto F = forcing_terms(x, g, t, env, kGains);
        const double ub1 = sys.obs1.b[0] + rho.obs1 * sys.obs1.b[1] + kGains.omega1 * sys.obs1.b[2];
        const double ub2 = sys.obs2.b[0] + rho.obs2 * sys.obs2.b[1] + kGains.omega2 * sys.obs2.b[2];
        EXPECT_LE(ub1, F.obs1 * (1.0 + 1e-12) + 1e-300);
        EXPECT_LE(ub2, F.obs2 * (1.0 + 1e-12) + 1e-300);
    }
}

TEST(CertifiedBound, ClosedForms)
{
    const double c = 0.05;
    const double dt = 0.1;
    const std::vector<double> rate(1001, c);
    const std::vector<double> none(1001, 0.0);
    const auto decay = certified_bound(rate, none, 3.0, dt);
    EXPECT_NEAR(decay.back(), 3.0 * std::exp(-c * 100.0), 1e-13);

    const std::vector<double> source(1001, 0.7);
    const auto ramp = certified_bound(none, source, 0.0, dt);
    for (std::size_t i = 0; i < ramp.size(); i += 100) {
        EXPECT_NEAR(ramp[i], 0.7 * dt * static_cast<double>(i), 1e-11);
    }
    EXPECT_THROW(certified_bound(std::vector<double>{}, std::vector<double>{}, 1.0, dt), InvalidInput);
}

TEST(DualInequality, HoldsAtStartWithScheduledGains)
{
    const auto env = fixtures::seasonal(0.1);
    const auto init = fixtures::reference_initial();
    const double y = incidence_output(init.truth, 0.0, env);
    const auto s = schedule_gains(init.obs, y, 0.0, kParams, env, kGains);
    const auto rho = rho_weights(kGains, env, 1825.0);
    const auto delta = delta_rates(s.xi, kParams);
    const auto sys = build_error_systems(init.truth, init.obs, s.gains, 0.0, kParams, env);
    const Vec3 r1 = verify_dual_inequality(sys.obs1.A, delta.obs1, kGains.omega1, rho.obs1);
    const Vec3 r2 = verify_dual_inequality(sys.obs2.A, delta.obs2, kGains.omega2, rho.obs2);
    for (int j = 0; j < 3; ++j) {
        EXPECT_LE(r1[j], 1e-9);
        EXPECT_LE(r2[j], 1e-9);
    }
}

TEST(DualInequality, HandComputedColumns)
{
    const Mat3 A{{{-1.0, 0.0, 2.0}, {0.0, -3.0, 0.0}, {0.5, 4.0, -6.0}}};
    const Vec3 r = verify_dual_inequality(A, 0.5, 10.0, 2.0);
    EXPECT_DOUBLE_EQ(r[0], -1.0 + 10.0 * 0.5 + 0.5);
    EXPECT_DOUBLE_EQ(r[1], 2.0 * -3.0 + 10.0 * 4.0 + 2.0 * 0.5);
    EXPECT_DOUBLE_EQ(r[2], 2.0 + 10.0 * -6.0 + 10.0 * 0.5);
}

TEST(BoundTolerance, GrowsWithSpacingAndHorizon)
{
    EXPECT_EQ(bound_tolerance(1e-5, 1.0), 1e-8);
    EXPECT_DOUBLE_EQ(bound_tolerance(0.1, 1825.0), 10.0 * 0.01 * 1825.0);
}
