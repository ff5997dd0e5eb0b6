/// @file verification.hpp
/// @brief Re-checks every invariant of a recorded trace and tallies the violations.
///
/// The model-free checks need only the rows. Passing a ModelContext additionally rebuilds
/// the error systems, gain targets and rates at every sample from the recorded states.

#pragma once

#include "ivobs/error_analysis.hpp"
#include "ivobs/model.hpp"
#include "ivobs/observer.hpp"
#include "ivobs/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ivobs {

struct Tolerances {
    double invariant = 1e-9;       ///< simplex and nonnegativity slack
    double ordering = 1e-7;        ///< lower <= truth <= upper slack
    double dual = 1e-9;            ///< u^T (A + delta I) <= dual
    double b_floor = 1e-12;        ///< b >= -b_floor
    double delta_floor = 1e-12;    ///< delta >= mu_h - delta_floor
    double gain_residual = 1e-12;  ///< relative residual of the linear gain constraints
    double bound_recompute = 1e-9; ///< relative mismatch between recorded and recomputed bound
};

/// Count of failures of one named check, with the first offending time and the largest excess.
struct CheckTally {
    std::string name;
    std::size_t count = 0;
    double first_t = std::numeric_limits<double>::quiet_NaN();
    double worst = 0.0;

    void record(double t, double excess)
    {
        if (count == 0) {
            first_t = t;
        }
        ++count;
        worst = std::max(worst, excess);
    }
};

class ViolationReport {
public:
    CheckTally& operator[](const std::string& name)
    {
        for (auto& t : tallies_) {
            if (t.name == name) {
                return t;
            }
        }
        tallies_.push_back({name});
        return tallies_.back();
    }

    const CheckTally* find(const std::string& name) const
    {
        for (const auto& t : tallies_) {
            if (t.name == name) {
                return &t;
            }
        }
        return nullptr;
    }

    std::size_t count(const std::string& name) const
    {
        const auto* t = find(name);
        return t ? t->count : 0;
    }

    std::size_t total() const
    {
        std::size_t n = 0;
        for (const auto& t : tallies_) {
            n += t.count;
        }
        return n;
    }

    const std::vector<CheckTally>& tallies() const noexcept { return tallies_; }

private:
    std::vector<CheckTally> tallies_;
};

/// Quantities rebuilt from a sample when the model is known.
struct SampleDiagnostics {
    PerObserver<ErrorSystem> systems;
    PerObserver<Vec3> dual;
};

/// Extremes and headline metrics over a whole trace.
struct TraceSummary {
    std::size_t samples = 0;
    double t_final = 0.0;
    double spacing = 0.0;
    PerObserver<double> V_initial;
    PerObserver<double> V_final;
    PerObserver<double> bound_final;
    PerObserver<double> max_V_minus_bound{-std::numeric_limits<double>::infinity(),
                                          -std::numeric_limits<double>::infinity()};
    double rel_S_width_final = 0.0;     ///< (S_h_hi - S_h_lo) / S_h at the last sample
    double rel_S_width_last_year = 0.0; ///< same quantity averaged over the final 365 days
    double max_I_h_width_after_year1 = 0.0;
    double max_ordering_excess = 0.0;

    // Populated only when a model is supplied.
    bool model_checked = false;
    double min_off_diagonal = std::numeric_limits<double>::infinity();
    double min_b = std::numeric_limits<double>::infinity();
    double max_abs_b = 0.0;
    double max_dual = -std::numeric_limits<double>::infinity();
    PerObserver<double> delta_min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    PerObserver<double> delta_max{-std::numeric_limits<double>::infinity(),
                                  -std::numeric_limits<double>::infinity()};
    double min_delta1_when_I_v_hi_above_5pct = std::numeric_limits<double>::infinity();
    double max_gain_residual = 0.0;
};

struct VerificationResult {
    ViolationReport violations;
    TraceSummary summary;
    std::vector<SampleDiagnostics> diagnostics;
};

/// Everything needed to rebuild model-dependent quantities.
template <TransmissionEnvelope Env>
struct ModelContext {
    const EpidemicParams& params;
    const Env& envelope;
    const GainHyperParams& hyper;
    PerObserver<double> rho;
    bool keep_diagnostics = false; ///< retain per-sample A, b and dual residuals
};

namespace detail {

inline void check_model_free(const std::vector<TraceRow>& rows, double spacing, const Tolerances& tol,
                             ViolationReport& rep, TraceSummary& sum)
{
    const double horizon = rows.back().t_days - rows.front().t_days;
    const double tau_bnd = bound_tolerance(spacing, horizon);
    const double year1 = rows.front().t_days + 365.0;
    const double last_year = rows.back().t_days - 365.0;
    double width_acc = 0.0;
    std::size_t width_n = 0;

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto x = r.truth();
        const auto obs = r.observers();
        const double t = r.t_days;

        const double expected_t = rows.front().t_days + static_cast<double>(i) * spacing;
        if (std::abs(t - expected_t) > 1e-9 * std::max(1.0, std::abs(expected_t))) {
            rep["grid_uniform"].record(t, std::abs(t - expected_t));
        }

        const double simplex_excess = std::max({-x.S_h, -x.I_h, -x.I_v, x.S_h + x.I_h - 1.0, x.I_v - 1.0});
        if (simplex_excess > tol.invariant) {
            rep["truth_simplex"].record(t, simplex_excess);
        }
        if (-obs.min_component() > tol.invariant) {
            rep["observer_nonnegative"].record(t, -obs.min_component());
        }

        const auto lo = obs.lower();
        const auto hi = obs.upper();
        const double order_excess = std::max({lo.S_h - x.S_h, x.S_h - hi.S_h, lo.I_h - x.I_h, x.I_h - hi.I_h,
                                              lo.I_v - x.I_v, x.I_v - hi.I_v});
        sum.max_ordering_excess = std::max(sum.max_ordering_excess, order_excess);
        if (order_excess > tol.ordering) {
            rep["ordering"].record(t, order_excess);
        }

        if (!r.gains().nonnegative()) {
            rep["gains_nonnegative"].record(t, -std::min({r.k_S_lo, r.k_S_hi, r.k_v_lo, r.k_v_hi}));
        }
        if (std::min(r.F1, r.F2) < 0.0) {
            rep["forcing_nonnegative"].record(t, -std::min(r.F1, r.F2));
        }

        const double gap1 = r.V1 - r.bound1;
        const double gap2 = r.V2 - r.bound2;
        sum.max_V_minus_bound.obs1 = std::max(sum.max_V_minus_bound.obs1, gap1);
        sum.max_V_minus_bound.obs2 = std::max(sum.max_V_minus_bound.obs2, gap2);
        if (std::max(gap1, gap2) > tau_bnd) {
            rep["lyapunov_bound"].record(t, std::max(gap1, gap2));
        }

        if (t > year1) {
            sum.max_I_h_width_after_year1 = std::max(sum.max_I_h_width_after_year1, r.I_h_hi - r.I_h_lo);
        }
        if (t >= last_year && r.S_h > 0.0) {
            width_acc += (r.S_h_hi - r.S_h_lo) / r.S_h;
            ++width_n;
        }
    }

    // The recorded bound must be what the recorded delta, F and V(0) imply.
    std::vector<double> d1(rows.size()), d2(rows.size()), f1(rows.size()), f2(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d1[i] = rows[i].delta1;
        d2[i] = rows[i].delta2;
        f1[i] = rows[i].F1;
        f2[i] = rows[i].F2;
    }
    const auto b1 = certified_bound(d1, f1, rows.front().V1, spacing);
    const auto b2 = certified_bound(d2, f2, rows.front().V2, spacing);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double e1 = std::abs(b1[i] - rows[i].bound1) / std::max(1.0, std::abs(b1[i]));
        const double e2 = std::abs(b2[i] - rows[i].bound2) / std::max(1.0, std::abs(b2[i]));
        if (std::max(e1, e2) > tol.bound_recompute) {
            rep["bound_recomputed"].record(rows[i].t_days, std::max(e1, e2));
        }
    }

    const auto& first = rows.front();
    const auto& last = rows.back();
    sum.samples = rows.size();
    sum.t_final = last.t_days;
    sum.spacing = spacing;
    sum.V_initial = {first.V1, first.V2};
    sum.V_final = {last.V1, last.V2};
    sum.bound_final = {last.bound1, last.bound2};
    sum.rel_S_width_final = last.S_h > 0.0 ? (last.S_h_hi - last.S_h_lo) / last.S_h : 0.0;
    sum.rel_S_width_last_year = width_n > 0 ? width_acc / static_cast<double>(width_n) : 0.0;
}

} // namespace detail

/// Spacing of a uniform trace, inferred from its first two rows (0 for a single sample).
inline double trace_spacing(const std::vector<TraceRow>& rows)
{
    return rows.size() < 2 ? 0.0 : rows[1].t_days - rows[0].t_days;
}

/// Model-free verification of a recorded trace.
inline VerificationResult verify_trace(const std::vector<TraceRow>& rows, double spacing,
                                       const Tolerances& tol = {})
{
    if (rows.empty()) {
        throw InvalidInput("verify_trace: trace has no samples");
    }
    VerificationResult out;
    for (const char* name : {"truth_simplex", "observer_nonnegative", "ordering", "gains_nonnegative",
                             "forcing_nonnegative", "lyapunov_bound", "bound_recomputed", "grid_uniform"}) {
        out.violations[name];
    }
    detail::check_model_free(rows, spacing, tol, out.violations, out.summary);
    return out;
}

/// Full verification: model-free checks plus the error-system, rate and gain checks.
template <TransmissionEnvelope Env>
VerificationResult verify_trace(const std::vector<TraceRow>& rows, double spacing, const ModelContext<Env>& ctx,
                                const Tolerances& tol = {})
{
    VerificationResult out = verify_trace(rows, spacing, tol);
    auto& rep = out.violations;
    auto& sum = out.summary;
    for (const char* name : {"metzler", "b_nonnegative", "dual_inequality", "delta_range", "hyp_kS",
                             "gain_constraints", "xi_consistent"}) {
        rep[name];
    }
    sum.model_checked = true;
    const auto& p = ctx.params;
    const auto& hp = ctx.hyper;
    if (ctx.keep_diagnostics) {
        out.diagnostics.reserve(rows.size());
    }

    for (const auto& r : rows) {
        const double t = r.t_days;
        const auto x = r.truth();
        const auto obs = r.observers();
        const auto g = r.gains();
        const TransmissionRates rates = ctx.envelope(t);

        SampleDiagnostics diag;
        diag.systems = build_error_systems(x, obs, g, t, p, ctx.envelope);
        diag.dual = {verify_dual_inequality(diag.systems.obs1.A, r.delta1, hp.omega1, ctx.rho.obs1),
                     verify_dual_inequality(diag.systems.obs2.A, r.delta2, hp.omega2, ctx.rho.obs2)};

        const double off = std::min(diag.systems.obs1.min_off_diagonal(), diag.systems.obs2.min_off_diagonal());
        sum.min_off_diagonal = std::min(sum.min_off_diagonal, off);
        if (off < 0.0) {
            rep["metzler"].record(t, -off);
        }
        const double bmin = std::min(diag.systems.obs1.min_b(), diag.systems.obs2.min_b());
        sum.min_b = std::min(sum.min_b, bmin);
        sum.max_abs_b = std::max({sum.max_abs_b, diag.systems.obs1.max_abs_b(), diag.systems.obs2.max_abs_b()});
        if (bmin < -tol.b_floor) {
            rep["b_nonnegative"].record(t, -bmin);
        }
        const double dual_max = std::max({diag.dual.obs1[0], diag.dual.obs1[1], diag.dual.obs1[2], diag.dual.obs2[0],
                                          diag.dual.obs2[1], diag.dual.obs2[2]});
        sum.max_dual = std::max(sum.max_dual, dual_max);
        if (dual_max > tol.dual) {
            rep["dual_inequality"].record(t, dual_max);
        }

        sum.delta_min = {std::min(sum.delta_min.obs1, r.delta1), std::min(sum.delta_min.obs2, r.delta2)};
        sum.delta_max = {std::max(sum.delta_max.obs1, r.delta1), std::max(sum.delta_max.obs2, r.delta2)};
        const double lower = p.mu_h - tol.delta_floor;
        const double upper = p.mu_h + p.gamma;
        for (double d : {r.delta1, r.delta2}) {
            if (!(d >= lower && d < upper)) {
                rep["delta_range"].record(t, d < lower ? lower - d : d - upper);
            }
        }
        if (r.I_v_hi > 0.05) {
            sum.min_delta1_when_I_v_hi_above_5pct = std::min(sum.min_delta1_when_I_v_hi_above_5pct, r.delta1);
        }

        if (!check_hyp_kS(g, obs, r.y, p, hp).ok()) {
            rep["hyp_kS"].record(t, 1.0);
        }

        const XiTargets xi{r.xi1, r.xi2, 0.0, 0.0};
        const auto res = gain_constraint_residuals(g, xi, rates, hp);
        const double scale1 = std::max({std::abs(r.xi1), std::abs(r.k_S_lo * rates.beta_vh_hi), 1e-300});
        const double scale2 = std::max({std::abs(r.xi2), std::abs(r.k_S_hi * rates.beta_vh_lo), 1e-300});
        const double rel = std::max(std::abs(res.obs1) / scale1, std::abs(res.obs2) / scale2);
        sum.max_gain_residual = std::max(sum.max_gain_residual, rel);
        if (rel > tol.gain_residual) {
            rep["gain_constraints"].record(t, rel);
        }

        const XiTargets xi_ref = xi_targets(obs, t, p, ctx.envelope, hp);
        const double xi_err = std::max(std::abs(xi_ref.xi1 - r.xi1) / std::max(1.0, std::abs(xi_ref.xi1)),
                                       std::abs(xi_ref.xi2 - r.xi2) / std::max(1.0, std::abs(xi_ref.xi2)));
        if (xi_err > 1e-12) {
            rep["xi_consistent"].record(t, xi_err);
        }

        if (ctx.keep_diagnostics) {
            out.diagnostics.push_back(diag);
        }
    }
    return out;
}

} // namespace ivobs
