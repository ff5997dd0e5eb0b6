/// @file integrator.hpp
/// @brief Fixed-step RK4 for the coupled plant + observer-pair system and certified runs.
///
/// Every stage evaluates the incidence from its own true state and reschedules the gains from
/// its own observer states, so the gains behave as continuous-time signals. Times are
/// always formed as n * h from the integer step count; they never accumulate.

#pragma once

#include "ivobs/error_analysis.hpp"
#include "ivobs/errors.hpp"
#include "ivobs/model.hpp"
#include "ivobs/observer.hpp"
#include "ivobs/trace.hpp"
#include "ivobs/verification.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ivobs {

/// The 3 true states followed by the 6 estimates.
struct State9 {
    HostVectorState truth;
    ObserverPairState obs;

    bool operator==(const State9&) const = default;

    using Array = std::array<double, 9>;

    Array to_array() const noexcept
    {
        return {truth.S_h,      truth.I_h,      truth.I_v,      obs.obs1.S_h_lo, obs.obs1.I_h_hi,
                obs.obs1.I_v_hi, obs.obs2.S_h_hi, obs.obs2.I_h_lo, obs.obs2.I_v_lo};
    }

    static State9 from_array(const Array& a) noexcept
    {
        return {{a[0], a[1], a[2]}, {{a[3], a[4], a[5]}, {a[6], a[7], a[8]}}};
    }
};

/// Throws InvalidInput unless 0 <= lower <= truth <= upper componentwise.
inline void validate_initial_ordering(const State9& x)
{
    if (!x.truth.in_simplex()) {
        throw InvalidInput("initial true state lies outside {S_h, I_h, I_v >= 0, S_h + I_h <= 1, I_v <= 1}");
    }
    if (x.obs.min_component() < 0.0) {
        throw InvalidInput("initial estimates must be nonnegative");
    }
    if (!x.obs.brackets(x.truth)) {
        throw InvalidInput("initial estimates must satisfy 0 <= lower <= truth <= upper componentwise");
    }
}

struct IntegrationConfig {
    double step_days = 0.01;
    double horizon_days = 5 * 365.0;
    std::int64_t output_stride = 1; ///< record every `output_stride` steps

    static constexpr double kMaxStep = 0.1;

    /// Number of steps; throws unless horizon is a nonnegative integer multiple of the step.
    std::int64_t steps() const
    {
        if (!(std::isfinite(step_days) && step_days > 0.0 && step_days <= kMaxStep)) {
            throw InvalidInput("integration: step must lie in (0, 0.1] days");
        }
        if (!(std::isfinite(horizon_days) && horizon_days >= 0.0)) {
            throw InvalidInput("integration: horizon must be finite and nonnegative");
        }
        const double ratio = horizon_days / step_days;
        if (ratio > 1e12) {
            throw InvalidInput("integration: horizon / step exceeds the supported step count");
        }
        const double n = std::round(ratio);
        if (std::abs(n - ratio) > 1e-9 * std::max(1.0, ratio)) {
            throw InvalidInput("integration: horizon must be an integer multiple of the step");
        }
        return static_cast<std::int64_t>(n);
    }

    void validate() const
    {
        const auto n = steps();
        if (output_stride < 1) {
            throw InvalidInput("integration: output stride must be at least 1");
        }
        if (n % output_stride != 0) {
            throw InvalidInput("integration: step count must be a multiple of the output stride");
        }
    }

    double output_spacing() const noexcept { return step_days * static_cast<double>(output_stride); }
};

namespace detail {

struct CoupledRhs {
    State9::Array derivative;
    ScheduledGains schedule;
};

template <TransmissionEnvelope Env>
CoupledRhs coupled_rhs(const State9::Array& a, double t, const EpidemicParams& p, const Env& env,
                       const GainHyperParams& hp)
{
    const State9 x = State9::from_array(a);
    const double y = incidence_output(x.truth, t, env);
    const ScheduledGains s = schedule_gains(x.obs, y, t, p, env, hp);
    const Vec3 dx = reduced_dynamics(x.truth, t, p, env);
    const Vec3 d1 = obs1_dynamics(x.obs.obs1, y, t, p, env, s.gains);
    const Vec3 d2 = obs2_dynamics(x.obs.obs2, y, t, p, env, s.gains);
    CoupledRhs out{{dx[0], dx[1], dx[2], d1[0], d1[1], d1[2], d2[0], d2[1], d2[2]}, s};
    for (double v : out.derivative) {
        if (!std::isfinite(v)) {
            throw IntegrationFailure("non-finite derivative", t);
        }
    }
    return out;
}

inline State9::Array axpy(const State9::Array& x, double h, const State9::Array& k) noexcept
{
    State9::Array out;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x[i] + h * k[i];
    }
    return out;
}

} // namespace detail

/// One classical RK4 step of size h from time t. If `first_stage` is given it receives the
/// gain schedule evaluated at (x, t).
template <TransmissionEnvelope Env>
State9 advance_coupled(const State9& x, double t, double h, const EpidemicParams& p, const Env& env,
                       const GainHyperParams& hp, ScheduledGains* first_stage = nullptr)
{
    const State9::Array x0 = x.to_array();
    const auto k1 = detail::coupled_rhs(x0, t, p, env, hp);
    if (first_stage != nullptr) {
        *first_stage = k1.schedule;
    }
    const auto k2 = detail::coupled_rhs(detail::axpy(x0, 0.5 * h, k1.derivative), t + 0.5 * h, p, env, hp);
    const auto k3 = detail::coupled_rhs(detail::axpy(x0, 0.5 * h, k2.derivative), t + 0.5 * h, p, env, hp);
    const auto k4 = detail::coupled_rhs(detail::axpy(x0, h, k3.derivative), t + h, p, env, hp);
    State9::Array out;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = x0[i] + h / 6.0 * (k1.derivative[i] + 2.0 * k2.derivative[i] + 2.0 * k3.derivative[i]
                                    + k4.derivative[i]);
        if (!std::isfinite(out[i])) {
            throw IntegrationFailure("non-finite state after step", t + h);
        }
    }
    return State9::from_array(out);
}

/// Integrates to the horizon and returns only the final state (no recording, no checks).
template <TransmissionEnvelope Env>
State9 integrate_endpoint(const State9& initial, const IntegrationConfig& cfg, const EpidemicParams& p,
                          const Env& env, const GainHyperParams& hp)
{
    const auto n = cfg.steps();
    State9 x = initial;
    for (std::int64_t i = 0; i < n; ++i) {
        x = advance_coupled(x, static_cast<double>(i) * cfg.step_days, cfg.step_days, p, env, hp);
    }
    return x;
}

/// A run with its recorded samples, the a-priori weights and the verification outcome.
struct CertifiedTrace {
    std::vector<TraceRow> rows;
    PerObserver<double> rho;
    double spacing = 0.0;
    VerificationResult verification;
    std::vector<double> guard_switch_times; ///< steps at which a floor branch of the gains toggled
    std::vector<HostVectorState> truth_per_step; ///< filled only when requested
};

struct RunOptions {
    Tolerances tolerances{};
    bool keep_diagnostics = false;
    bool keep_truth_per_step = false;
};

/// Everything recorded at an output instant except the certified bound.
template <TransmissionEnvelope Env>
TraceRow record_sample(const State9& x, double t, const EpidemicParams& p, const Env& env,
                       const GainHyperParams& hp, const PerObserver<double>& rho)
{
    const double y = incidence_output(x.truth, t, env);
    const ScheduledGains s = schedule_gains(x.obs, y, t, p, env, hp);
    const auto delta = delta_rates(s.xi, p);
    const auto F = forcing_terms(x.truth, s.gains, t, env, hp);
    const auto V = lyapunov_values(error_vectors(x.truth, x.obs), hp, rho);

    TraceRow r;
    r.t_days = t;
    r.S_h = x.truth.S_h;
    r.I_h = x.truth.I_h;
    r.I_v = x.truth.I_v;
    r.S_h_lo = x.obs.obs1.S_h_lo;
    r.I_h_hi = x.obs.obs1.I_h_hi;
    r.I_v_hi = x.obs.obs1.I_v_hi;
    r.S_h_hi = x.obs.obs2.S_h_hi;
    r.I_h_lo = x.obs.obs2.I_h_lo;
    r.I_v_lo = x.obs.obs2.I_v_lo;
    r.y = y;
    r.k_S_lo = s.gains.k_S_lo;
    r.k_v_hi = s.gains.k_v_hi;
    r.k_S_hi = s.gains.k_S_hi;
    r.k_v_lo = s.gains.k_v_lo;
    r.xi1 = s.xi.xi1;
    r.xi2 = s.xi.xi2;
    r.delta1 = delta.obs1;
    r.delta2 = delta.obs2;
    r.F1 = F.obs1;
    r.F2 = F.obs2;
    r.V1 = V.obs1;
    r.V2 = V.obs2;
    return r;
}

/// Integrates from validated, ordered initial data; records every `output_stride` steps;
/// evaluates the certified bounds on the recorded grid; and verifies every invariant.
template <TransmissionEnvelope Env>
CertifiedTrace run(const State9& initial, const IntegrationConfig& cfg, const EpidemicParams& p, const Env& env,
                   const GainHyperParams& hp, const RunOptions& opts = {})
{
    p.validate();
    hp.validate(p);
    cfg.validate();
    validate_initial_ordering(initial);

    const auto n = cfg.steps();
    const double h = cfg.step_days;
    CertifiedTrace out;
    out.rho = rho_weights(hp, env, cfg.horizon_days);
    out.spacing = cfg.output_spacing();
    out.rows.reserve(static_cast<std::size_t>(n / cfg.output_stride + 1));
    if (opts.keep_truth_per_step) {
        out.truth_per_step.reserve(static_cast<std::size_t>(n + 1));
    }

    State9 x = initial;
    bool guard_lo = false;
    bool guard_hi = false;
    for (std::int64_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) * h;
        if (opts.keep_truth_per_step) {
            out.truth_per_step.push_back(x.truth);
        }
        if (i % cfg.output_stride == 0) {
            out.rows.push_back(record_sample(x, t, p, env, hp, out.rho));
        }
        if (i == n) {
            break;
        }
        ScheduledGains stage1;
        x = advance_coupled(x, t, h, p, env, hp, &stage1);
        if (i == 0) {
            guard_lo = stage1.guard_lo;
            guard_hi = stage1.guard_hi;
        } else if (stage1.guard_lo != guard_lo || stage1.guard_hi != guard_hi) {
            out.guard_switch_times.push_back(t);
            guard_lo = stage1.guard_lo;
            guard_hi = stage1.guard_hi;
        }
    }

    std::vector<double> d1, d2, f1, f2;
    d1.reserve(out.rows.size());
    d2.reserve(out.rows.size());
    f1.reserve(out.rows.size());
    f2.reserve(out.rows.size());
    for (const auto& r : out.rows) {
        d1.push_back(r.delta1);
        d2.push_back(r.delta2);
        f1.push_back(r.F1);
        f2.push_back(r.F2);
    }
    const auto b1 = certified_bound(d1, f1, out.rows.front().V1, out.spacing);
    const auto b2 = certified_bound(d2, f2, out.rows.front().V2, out.spacing);
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        out.rows[i].bound1 = b1[i];
        out.rows[i].bound2 = b2[i];
    }

    const ModelContext<Env> ctx{p, env, hp, out.rho, opts.keep_diagnostics};
    out.verification = verify_trace(out.rows, out.spacing, ctx, opts.tolerances);
    return out;
}

} // namespace ivobs
