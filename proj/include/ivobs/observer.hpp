/// @file observer.hpp
/// @brief The pair of interval observers driven by the measured incidence, and their gain schedule.
///
/// Observer 1 carries (S_h_lo, I_h_hi, I_v_hi) and observer 2 carries (S_h_hi, I_h_lo, I_v_lo).
/// The two are coupled: both gain targets use S_h_hi. They must therefore be advanced
/// together, from the same instant, within one integration step.

#pragma once

#include "ivobs/envelope.hpp"
#include "ivobs/errors.hpp"
#include "ivobs/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ivobs {

/// State of observer 1: lower estimate of S_h, upper estimates of I_h and I_v.
struct Obs1State {
    double S_h_lo = 0.0;
    double I_h_hi = 0.0;
    double I_v_hi = 0.0;

    bool operator==(const Obs1State&) const = default;
};

/// State of observer 2: upper estimate of S_h, lower estimates of I_h and I_v.
struct Obs2State {
    double S_h_hi = 0.0;
    double I_h_lo = 0.0;
    double I_v_lo = 0.0;

    bool operator==(const Obs2State&) const = default;
};

struct ObserverPairState {
    Obs1State obs1;
    Obs2State obs2;

    bool operator==(const ObserverPairState&) const = default;

    HostVectorState lower() const noexcept { return {obs1.S_h_lo, obs2.I_h_lo, obs2.I_v_lo}; }
    HostVectorState upper() const noexcept { return {obs2.S_h_hi, obs1.I_h_hi, obs1.I_v_hi}; }

    bool is_finite() const noexcept { return lower().is_finite() && upper().is_finite(); }

    double min_component() const noexcept
    {
        return std::min({obs1.S_h_lo, obs1.I_h_hi, obs1.I_v_hi, obs2.S_h_hi, obs2.I_h_lo, obs2.I_v_lo});
    }

    /// lower <= truth <= upper componentwise, relaxed by `tol`.
    bool brackets(const HostVectorState& x, double tol = 0.0) const noexcept
    {
        const HostVectorState lo = lower();
        const HostVectorState hi = upper();
        return lo.S_h <= x.S_h + tol && x.S_h <= hi.S_h + tol && lo.I_h <= x.I_h + tol && x.I_h <= hi.I_h + tol
               && lo.I_v <= x.I_v + tol && x.I_v <= hi.I_v + tol;
    }
};

/// Fixed design constants of the gain schedule.
struct GainHyperParams {
    double omega1 = 1e5;   ///< weight of the I_v error in observer 1's Lyapunov function
    double omega2 = 1e5;   ///< same for observer 2
    double eps_obs1 = 1e-4; ///< margin below gamma in observer 1's target (day^-1)
    double eps_obs2 = 1e-4; ///< same for observer 2 (day^-1)
    double eps1 = 1e-5;    ///< floor on mu_h + (k_S - 1) y near S_h = 0 (day^-1)
    double eps2 = 1e-5;    ///< S_h estimate threshold below which the floor is enforced

    void validate(const EpidemicParams& p) const
    {
        const double all[] = {omega1, omega2, eps_obs1, eps_obs2, eps1, eps2};
        for (double v : all) {
            if (!(std::isfinite(v) && v > 0.0)) {
                throw InvalidInput("gain hyper-parameters must be finite and strictly positive");
            }
        }
        if (!(eps_obs1 < p.gamma && eps_obs2 < p.gamma)) {
            throw InvalidInput("gain hyper-parameters require eps_obs1, eps_obs2 < gamma");
        }
        if (!(eps1 <= p.mu_h)) {
            throw InvalidInput("gain hyper-parameters require eps1 <= mu_h");
        }
    }
};

struct GainValues {
    double k_S_lo = 0.0; ///< observer 1, S_h_lo correction
    double k_v_hi = 0.0; ///< observer 1, I_v_hi correction
    double k_S_hi = 0.0; ///< observer 2, S_h_hi correction
    double k_v_lo = 0.0; ///< observer 2, I_v_lo correction

    bool operator==(const GainValues&) const = default;

    bool nonnegative() const noexcept { return k_S_lo >= 0.0 && k_v_hi >= 0.0 && k_S_hi >= 0.0 && k_v_lo >= 0.0; }
};

/// Gain targets xi and the products xi * I_v that enter the convergence rates.
/// The products are formed branch by branch, so they stay finite as I_v -> 0.
struct XiTargets {
    double xi1 = 0.0;
    double xi2 = 0.0;
    double xi1_Iv = 0.0; ///< xi1 * I_v_hi
    double xi2_Iv = 0.0; ///< xi2 * I_v_lo
};

namespace detail {

inline constexpr double kDivisionFloor = 1e-300;

struct XiBranch {
    double xi;
    double xi_Iv;
};

/// min{(gamma - eps) / I_v ; num / (S_h_hi / omega + I_v)}; the first branch is dropped when I_v <= 0.
inline XiBranch xi_branch(double gamma_margin, double numerator, double S_h_hi, double omega, double I_v,
                          const char* which)
{
    const double denominator = S_h_hi / omega + I_v;
    const bool first = I_v > 0.0;
    const bool second = denominator > 0.0;
    if (!first && !second) {
        throw DegenerateState(std::string(which) + ": I_v estimate and S_h_hi / omega + I_v both vanish");
    }
    if (!second) {
        return {gamma_margin / I_v, gamma_margin};
    }
    const double second_xi = numerator / denominator;
    if (!first) {
        return {second_xi, second_xi * I_v};
    }
    const double first_xi = gamma_margin / I_v;
    if (first_xi <= second_xi) {
        return {first_xi, gamma_margin};
    }
    return {second_xi, numerator * (I_v / denominator)};
}

} // namespace detail

/// Targets for k_S beta - omega k_v beta that maximize each observer's convergence rate.
template <TransmissionEnvelope Env>
XiTargets xi_targets(const ObserverPairState& obs, double t, const EpidemicParams& p, const Env& env,
                     const GainHyperParams& hp)
{
    if (!obs.is_finite()) {
        throw InvalidInput("xi_targets: observer state has non-finite components");
    }
    const TransmissionRates r = env(t);
    const auto b1 = detail::xi_branch(p.gamma - hp.eps_obs1, p.mu_v - p.mu_h + r.beta_hv_hi * obs.obs1.I_h_hi,
                                      obs.obs2.S_h_hi, hp.omega1, obs.obs1.I_v_hi, "xi_targets (observer 1)");
    const auto b2 = detail::xi_branch(p.gamma - hp.eps_obs2, p.mu_v - p.mu_h + r.beta_hv_lo * obs.obs2.I_h_lo,
                                      obs.obs2.S_h_hi, hp.omega2, obs.obs2.I_v_lo, "xi_targets (observer 2)");
    return {b1.xi, b2.xi, b1.xi_Iv, b2.xi_Iv};
}

/// Gains together with the targets they were built from.
struct ScheduledGains {
    GainValues gains;
    XiTargets xi;
    bool guard_lo = false; ///< the S_h_lo floor branch raised k_S_lo
    bool guard_hi = false; ///< the S_h_hi floor branch raised k_S_hi
};

namespace detail {

struct ChannelGains {
    double k_S;
    double k_v;
    bool guarded;
};

/// k_S = xi / beta_S, raised to 1 - (mu_h - eps1) / y when the S_h estimate is at or below eps2,
/// then k_v closes k_S beta_S - omega k_v beta_v = xi.
inline ChannelGains channel_gains(double xi, double beta_S, double beta_v, double omega, double S_estimate, double y,
                                  const EpidemicParams& p, const GainHyperParams& hp, const char* which)
{
    if (!(beta_S > kDivisionFloor)) {
        throw InfeasibleGain(std::string(which) + ": transmission bound multiplying k_S vanishes");
    }
    const double base = xi / beta_S;
    if (S_estimate <= hp.eps2 && y > 0.0) {
        const double floor_gain = 1.0 - (p.mu_h - hp.eps1) / y;
        if (floor_gain > base) {
            if (!(omega * beta_v > kDivisionFloor)) {
                throw InfeasibleGain(std::string(which)
                                     + ": k_v must be positive but its transmission bound vanishes");
            }
            return {floor_gain, (floor_gain * beta_S - xi) / (omega * beta_v), true};
        }
    }
    return {base, 0.0, false};
}

} // namespace detail

/// Closed-form gain schedule:
///   k_S_lo = xi1 / beta_vh_hi (floored when S_h_lo <= eps2), k_v_hi = (k_S_lo beta_vh_hi - xi1) / (omega1 beta_vh_lo),
///   k_S_hi = xi2 / beta_vh_lo (floored when S_h_hi <= eps2), k_v_lo = (k_S_hi beta_vh_lo - xi2) / (omega2 beta_vh_hi).
/// Away from the floors k_v_hi = k_v_lo = 0.
template <TransmissionEnvelope Env>
ScheduledGains schedule_gains(const ObserverPairState& obs, double y, double t, const EpidemicParams& p,
                              const Env& env, const GainHyperParams& hp)
{
    if (!std::isfinite(y) || y < 0.0) {
        throw InvalidInput("schedule_gains: incidence must be finite and nonnegative");
    }
    const XiTargets xi = xi_targets(obs, t, p, env, hp);
    const TransmissionRates r = env(t);
    const auto g1 = detail::channel_gains(xi.xi1, r.beta_vh_hi, r.beta_vh_lo, hp.omega1, obs.obs1.S_h_lo, y, p, hp,
                                          "schedule_gains (observer 1)");
    const auto g2 = detail::channel_gains(xi.xi2, r.beta_vh_lo, r.beta_vh_hi, hp.omega2, obs.obs2.S_h_hi, y, p, hp,
                                          "schedule_gains (observer 2)");
    return {{g1.k_S, g1.k_v, g2.k_S, g2.k_v}, xi, g1.guarded, g2.guarded};
}

/// Residuals of the two linear gain constraints k_S beta - omega k_v beta = xi.
struct GainConstraintResiduals {
    double obs1 = 0.0;
    double obs2 = 0.0;
};

inline GainConstraintResiduals gain_constraint_residuals(const GainValues& g, const XiTargets& xi,
                                                         const TransmissionRates& r, const GainHyperParams& hp)
{
    return {g.k_S_lo * r.beta_vh_hi - hp.omega1 * g.k_v_hi * r.beta_vh_lo - xi.xi1,
            g.k_S_hi * r.beta_vh_lo - hp.omega2 * g.k_v_lo * r.beta_vh_hi - xi.xi2};
}

struct HypKSReport {
    bool obs1 = true;
    bool obs2 = true;

    bool ok() const noexcept { return obs1 && obs2; }
};

/// mu_h + (k_S - 1) y >= eps1 whenever the matching S_h estimate is <= eps2 (vacuous otherwise).
/// `rel_tol` absorbs the rounding of the floor gain, which meets the condition with equality.
inline HypKSReport check_hyp_kS(const GainValues& g, const ObserverPairState& obs, double y, const EpidemicParams& p,
                                const GainHyperParams& hp, double rel_tol = 8 * std::numeric_limits<double>::epsilon())
{
    auto holds = [&](double k_S, double S_estimate) {
        if (S_estimate > hp.eps2) {
            return true;
        }
        const double lhs = p.mu_h + (k_S - 1.0) * y;
        const double scale = p.mu_h + std::abs(k_S * y) + y;
        return lhs >= hp.eps1 - rel_tol * scale;
    };
    return {holds(g.k_S_lo, obs.obs1.S_h_lo), holds(g.k_S_hi, obs.obs2.S_h_hi)};
}

/// Observer 1 right-hand side: d/dt (S_h_lo, I_h_hi, I_v_hi).
template <TransmissionEnvelope Env>
Vec3 obs1_dynamics(const Obs1State& o, double y, double t, const EpidemicParams& p, const Env& env,
                   const GainValues& g)
{
    const TransmissionRates r = env(t);
    return {
        p.mu_h * (1.0 - o.S_h_lo) - y + g.k_S_lo * (y - r.beta_vh_hi * o.S_h_lo * o.I_v_hi),
        y - (p.mu_h + p.gamma) * o.I_h_hi,
        r.beta_hv_hi * (1.0 - o.I_v_hi) * o.I_h_hi - p.mu_v * o.I_v_hi
            + g.k_v_hi * (y - r.beta_vh_lo * o.S_h_lo * o.I_v_hi),
    };
}

/// Observer 2 right-hand side: d/dt (S_h_hi, I_h_lo, I_v_lo).
template <TransmissionEnvelope Env>
Vec3 obs2_dynamics(const Obs2State& o, double y, double t, const EpidemicParams& p, const Env& env,
                   const GainValues& g)
{
    const TransmissionRates r = env(t);
    return {
        p.mu_h * (1.0 - o.S_h_hi) - y + g.k_S_hi * (y - r.beta_vh_lo * o.S_h_hi * o.I_v_lo),
        y - (p.mu_h + p.gamma) * o.I_h_lo,
        r.beta_hv_lo * (1.0 - o.I_v_lo) * o.I_h_lo - p.mu_v * o.I_v_lo
            + g.k_v_lo * (y - r.beta_vh_hi * o.S_h_hi * o.I_v_lo),
    };
}

} // namespace ivobs
