/// @file error_analysis.hpp
/// @brief Linear positive error systems of the two observers and their Lyapunov certificates.
///
/// The estimation errors X1 = (S_h - S_h_lo, I_h_hi - I_h, I_v_hi - I_v) and
/// X2 = (S_h_hi - S_h, I_h - I_h_lo, I_v - I_v_lo) obey dX/dt = A(t) X + b(t) exactly, with
/// A Metzler and b >= 0. The weighted sums V = e_S + rho e_h + omega e_v then satisfy
/// dV/dt + delta V <= F, which integrates to the certified bound.
///
/// rho only enters V and its bound, never the dynamics. It is fixed a priori from the
/// envelope supremum, taking the worst case I_v_lo = 0 unless a floor is supplied.

#pragma once

#include "ivobs/envelope.hpp"
#include "ivobs/errors.hpp"
#include "ivobs/model.hpp"
#include "ivobs/observer.hpp"
#include "ivobs/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace ivobs {

/// One value per observer.
template <class T>
struct PerObserver {
    T obs1{};
    T obs2{};

    bool operator==(const PerObserver&) const = default;
};

struct ErrorVector {
    double e_S = 0.0;
    double e_h = 0.0;
    double e_v = 0.0;

    Vec3 as_array() const noexcept { return {e_S, e_h, e_v}; }
    double min() const noexcept { return std::min({e_S, e_h, e_v}); }
};

inline PerObserver<ErrorVector> error_vectors(const HostVectorState& x, const ObserverPairState& obs)
{
    return {{x.S_h - obs.obs1.S_h_lo, obs.obs1.I_h_hi - x.I_h, obs.obs1.I_v_hi - x.I_v},
            {obs.obs2.S_h_hi - x.S_h, x.I_h - obs.obs2.I_h_lo, x.I_v - obs.obs2.I_v_lo}};
}

struct ErrorSystem {
    Mat3 A{};
    Vec3 b{};

    double min_off_diagonal() const noexcept
    {
        double m = A[0][1];
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                if (i != j) {
                    m = std::min(m, A[i][j]);
                }
            }
        }
        return m;
    }

    bool is_metzler() const noexcept { return min_off_diagonal() >= 0.0; }
    double min_b() const noexcept { return std::min({b[0], b[1], b[2]}); }
    double max_abs_b() const noexcept { return std::max({std::abs(b[0]), std::abs(b[1]), std::abs(b[2])}); }

    /// A X + b.
    Vec3 apply(const ErrorVector& e) const noexcept
    {
        const Vec3 x = e.as_array();
        Vec3 out = b;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                out[i] += A[i][j] * x[j];
            }
        }
        return out;
    }
};

/// A and b of both error systems at time t, built from the true state and the estimates.
template <TransmissionEnvelope Env>
PerObserver<ErrorSystem> build_error_systems(const HostVectorState& x, const ObserverPairState& obs,
                                             const GainValues& g, double t, const EpidemicParams& p,
                                             const Env& env)
{
    const TransmissionRates r = env(t);
    const double SI = x.S_h * x.I_v;
    const double IhSv = x.I_h * (1.0 - x.I_v);
    const auto& o1 = obs.obs1;
    const auto& o2 = obs.obs2;

    ErrorSystem s1;
    s1.A = {{
        {-p.mu_h - g.k_S_lo * r.beta_vh_hi * o1.I_v_hi, 0.0, g.k_S_lo * r.beta_vh_hi * x.S_h},
        {0.0, -(p.mu_h + p.gamma), 0.0},
        {g.k_v_hi * r.beta_vh_lo * o1.I_v_hi, r.beta_hv_hi * (1.0 - x.I_v),
         -g.k_v_hi * r.beta_vh_lo * x.S_h - r.beta_hv_hi * o1.I_h_hi - p.mu_v},
    }};
    s1.b = {g.k_S_lo * (r.beta_vh_hi - r.beta_vh) * SI, 0.0,
            g.k_v_hi * (r.beta_vh - r.beta_vh_lo) * SI + (r.beta_hv_hi - r.beta_hv) * IhSv};

    ErrorSystem s2;
    s2.A = {{
        {-p.mu_h - g.k_S_hi * r.beta_vh_lo * o2.I_v_lo, 0.0, g.k_S_hi * r.beta_vh_lo * x.S_h},
        {0.0, -(p.mu_h + p.gamma), 0.0},
        {g.k_v_lo * r.beta_vh_hi * o2.I_v_lo, r.beta_hv_lo * (1.0 - x.I_v),
         -g.k_v_lo * r.beta_vh_hi * x.S_h - r.beta_hv_lo * o2.I_h_lo - p.mu_v},
    }};
    s2.b = {g.k_S_hi * (r.beta_vh - r.beta_vh_lo) * SI, 0.0,
            g.k_v_lo * (r.beta_vh_hi - r.beta_vh) * SI + (r.beta_hv - r.beta_hv_lo) * IhSv};
    return {s1, s2};
}

/// V = e_S + rho e_h + omega e_v for each observer.
inline PerObserver<double> lyapunov_values(const PerObserver<ErrorVector>& e, const GainHyperParams& hp,
                                           const PerObserver<double>& rho)
{
    if (!(rho.obs1 > 0.0 && rho.obs2 > 0.0 && hp.omega1 > 0.0 && hp.omega2 > 0.0)) {
        throw InvalidInput("lyapunov_values: weights must be positive");
    }
    return {e.obs1.e_S + rho.obs1 * e.obs1.e_h + hp.omega1 * e.obs1.e_v,
            e.obs2.e_S + rho.obs2 * e.obs2.e_h + hp.omega2 * e.obs2.e_v};
}

/// rho = omega sup_t beta_hv_bound(t) (1 - I_v_lo_floor) / eps over [0, horizon].
///
/// The supremum is the larger of a dense sample (spacing `grid_days`) and the envelope's own
/// analytic supremum when it provides one.
template <TransmissionEnvelope Env>
PerObserver<double> rho_weights(const GainHyperParams& hp, const Env& env, double horizon,
                                double I_v_lo_floor = 0.0, double grid_days = 0.05)
{
    if (!(std::isfinite(horizon) && horizon >= 0.0)) {
        throw InvalidInput("rho_weights: horizon must be finite and nonnegative");
    }
    if (!(I_v_lo_floor >= 0.0 && I_v_lo_floor < 1.0)) {
        throw InvalidInput("rho_weights: I_v_lo floor must lie in [0, 1)");
    }
    double sup_hi = 0.0;
    double sup_lo = 0.0;
    const auto samples = static_cast<std::size_t>(std::ceil(horizon / grid_days));
    for (std::size_t i = 0; i <= samples; ++i) {
        const double t = std::min(horizon, static_cast<double>(i) * grid_days);
        const TransmissionRates r = env(t);
        if (!std::isfinite(r.beta_hv_hi) || !std::isfinite(r.beta_hv_lo)) {
            throw InvalidInput("rho_weights: envelope is unbounded on the horizon");
        }
        sup_hi = std::max(sup_hi, r.beta_hv_hi);
        sup_lo = std::max(sup_lo, r.beta_hv_lo);
    }
    if constexpr (HasAnalyticSupremum<Env>) {
        const TransmissionRates s = env.supremum(horizon);
        if (!std::isfinite(s.beta_hv_hi) || !std::isfinite(s.beta_hv_lo)) {
            throw InvalidInput("rho_weights: envelope is unbounded on the horizon");
        }
        sup_hi = std::max(sup_hi, s.beta_hv_hi);
        sup_lo = std::max(sup_lo, s.beta_hv_lo);
    }
    const double keep = 1.0 - I_v_lo_floor;
    return {hp.omega1 * sup_hi * keep / hp.eps_obs1, hp.omega2 * sup_lo * keep / hp.eps_obs2};
}

/// delta = mu_h + xi I_v; guaranteed to lie in [mu_h, mu_h + gamma).
inline PerObserver<double> delta_rates(const XiTargets& xi, const EpidemicParams& p, double lower_tol = 1e-12)
{
    const PerObserver<double> d{p.mu_h + xi.xi1_Iv, p.mu_h + xi.xi2_Iv};
    for (double v : {d.obs1, d.obs2}) {
        if (!(v >= p.mu_h - lower_tol && v < p.mu_h + p.gamma)) {
            throw InternalInconsistency("delta_rates: rate " + std::to_string(v)
                                        + " left [mu_h, mu_h + gamma); xi is misconfigured");
        }
    }
    return d;
}

/// Overload taking the observer state, for callers holding xi without the stored products.
inline PerObserver<double> delta_rates(double xi1, double xi2, const ObserverPairState& obs, const EpidemicParams& p,
                                       double lower_tol = 1e-12)
{
    XiTargets xi{xi1, xi2, obs.obs1.I_v_hi > 0.0 ? xi1 * obs.obs1.I_v_hi : 0.0,
                 obs.obs2.I_v_lo > 0.0 ? xi2 * obs.obs2.I_v_lo : 0.0};
    return delta_rates(xi, p, lower_tol);
}

/// Upper bounds F >= u^T b on the uncertainty-driven forcing of each Lyapunov function.
template <TransmissionEnvelope Env>
PerObserver<double> forcing_terms(const HostVectorState& x, const GainValues& g, double t, const Env& env,
                                  const GainHyperParams& hp)
{
    const TransmissionRates r = env(t);
    const double SI = x.S_h * x.I_v;
    const double d_vh = r.beta_vh_hi - r.beta_vh_lo;
    const double d_hv_term = (r.beta_hv_hi - r.beta_hv_lo) * x.I_h * (1.0 - x.I_v);
    return {hp.omega1 * (g.k_v_hi * d_vh * SI + d_hv_term) + g.k_S_lo * d_vh * SI,
            hp.omega2 * (g.k_v_lo * d_vh * SI + d_hv_term) + g.k_S_hi * d_vh * SI};
}

/// bound(t_i) = e^{-int_0^t delta} V0 + int_0^t e^{-int_s^t delta} F(s) ds on a uniform grid.
inline std::vector<double> certified_bound(std::span<const double> delta, std::span<const double> forcing, double V0,
                                           double dt)
{
    if (delta.empty()) {
        throw InvalidInput("certified_bound: empty time grid");
    }
    return discounted_accumulation(delta, forcing, V0, dt);
}

/// Componentwise u^T (A + delta I) with u = (1, rho, omega); all three must be <= 0.
inline Vec3 verify_dual_inequality(const Mat3& A, double delta, double omega, double rho)
{
    const Vec3 u{1.0, rho, omega};
    Vec3 out{};
    for (std::size_t j = 0; j < 3; ++j) {
        double s = delta * u[j];
        for (std::size_t i = 0; i < 3; ++i) {
            s += u[i] * A[i][j];
        }
        out[j] = s;
    }
    return out;
}

/// Tolerance for V <= bound: trapezoid error grows like spacing^2 times the horizon.
inline double bound_tolerance(double spacing, double horizon)
{
    return std::max(1e-8, 10.0 * spacing * spacing * horizon);
}

} // namespace ivobs
