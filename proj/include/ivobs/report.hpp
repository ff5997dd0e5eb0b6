/// @file report.hpp
/// @brief Scenario execution, the JSON verification report, and the step-halving study.

#pragma once

#include "ivobs/integrator.hpp"
#include "ivobs/scenario.hpp"
#include "ivobs/trace.hpp"
#include "ivobs/verification.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <vector>

namespace ivobs {

/// Process exit codes shared by every CLI verb.
enum class ExitCode : int {
    ok = 0,
    violations = 1,   ///< ran to completion but some check failed
    bad_input = 2,    ///< configuration, usage or file-format error
    run_failure = 3,  ///< integration failure, infeasible gain or degenerate state
};

namespace detail {

inline nlohmann::json finite_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

} // namespace detail

inline nlohmann::json verification_to_json(const VerificationResult& v)
{
    using nlohmann::json;
    using detail::finite_or_null;
    json checks = json::object();
    for (const auto& t : v.violations.tallies()) {
        checks[t.name] = {{"count", t.count}, {"first_t_days", finite_or_null(t.first_t)}, {"worst", t.worst}};
    }
    const auto& s = v.summary;
    json out = {
        {"status", v.violations.total() == 0 ? "pass" : "fail"},
        {"total_violations", v.violations.total()},
        {"checks", checks},
        {"samples", s.samples},
        {"t_final_days", s.t_final},
        {"spacing_days", s.spacing},
        {"initial", {{"V1", s.V_initial.obs1}, {"V2", s.V_initial.obs2}}},
        {"final",
         {{"V1", s.V_final.obs1},
          {"V2", s.V_final.obs2},
          {"bound1", s.bound_final.obs1},
          {"bound2", s.bound_final.obs2}}},
        {"metrics",
         {{"rel_S_h_width_final", s.rel_S_width_final},
          {"rel_S_h_width_last_year_mean", s.rel_S_width_last_year},
          {"max_I_h_width_after_year1", s.max_I_h_width_after_year1}}},
        {"max_residuals",
         {{"max_ordering_excess", s.max_ordering_excess},
          {"max_V_minus_bound", {finite_or_null(s.max_V_minus_bound.obs1), finite_or_null(s.max_V_minus_bound.obs2)}}}},
    };
    if (s.model_checked) {
        auto& m = out["max_residuals"];
        m["min_off_diagonal_A"] = finite_or_null(s.min_off_diagonal);
        m["min_b"] = finite_or_null(s.min_b);
        m["max_abs_b"] = s.max_abs_b;
        m["max_dual_component"] = finite_or_null(s.max_dual);
        m["max_gain_constraint_residual"] = s.max_gain_residual;
        out["metrics"]["delta1_range"] = {finite_or_null(s.delta_min.obs1), finite_or_null(s.delta_max.obs1)};
        out["metrics"]["delta2_range"] = {finite_or_null(s.delta_min.obs2), finite_or_null(s.delta_max.obs2)};
        out["metrics"]["min_delta1_when_I_v_hi_above_5pct"] = finite_or_null(s.min_delta1_when_I_v_hi_above_5pct);
    }
    return out;
}

inline nlohmann::json trace_report(const ScenarioConfig& cfg, const CertifiedTrace& trace)
{
    nlohmann::json rep = verification_to_json(trace.verification);
    rep["scenario"] = cfg.name;
    rep["weights"] = {{"rho1", trace.rho.obs1},
                      {"rho2", trace.rho.obs2},
                      {"omega1", cfg.gains.omega1},
                      {"omega2", cfg.gains.omega2}};
    rep["guard_switches"] = {{"count", trace.guard_switch_times.size()}, {"times_days", trace.guard_switch_times}};
    return rep;
}

struct ScenarioOutcome {
    CertifiedTrace trace;
    nlohmann::json report;
    ExitCode exit_code = ExitCode::ok;
    std::filesystem::path trace_path;
    std::filesystem::path report_path;
};

/// Runs a validated configuration and writes the trace CSV, the report JSON and the
/// effective configuration (config.json) into cfg.output.dir.
inline ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {})
{
    ScenarioOutcome out;
    out.trace = run(cfg.initial, cfg.integration, cfg.params, cfg.envelope, cfg.gains, opts);
    out.report = trace_report(cfg, out.trace);
    out.exit_code = out.trace.verification.violations.total() == 0 ? ExitCode::ok : ExitCode::violations;

    const std::filesystem::path dir(cfg.output.dir);
    std::filesystem::create_directories(dir);
    out.trace_path = dir / cfg.output.trace;
    out.report_path = dir / cfg.output.report;
    {
        std::ofstream f(out.trace_path, std::ios::binary);
        if (!f) {
            throw Error("cannot write " + out.trace_path.string());
        }
        write_trace_csv(f, out.trace.rows);
    }
    {
        std::ofstream f(out.report_path, std::ios::binary);
        if (!f) {
            throw Error("cannot write " + out.report_path.string());
        }
        f << out.report.dump(2) << '\n';
    }
    std::ofstream(dir / "config.json", std::ios::binary) << to_json(cfg).dump(2) << '\n';
    return out;
}

/// Endpoint errors of runs with steps h, h/2, h/4 against an h/8 reference.
struct ConvergenceStudy {
    double step_days = 0.0;
    double horizon_days = 0.0;
    std::vector<double> steps;       ///< h, h/2, h/4, h/8
    std::vector<double> errors;      ///< max-norm endpoint error of the first three vs the last
    double ratio_h_over_h2 = 0.0;    ///< errors[0] / errors[1]

    bool order4(double lo = 12.0, double hi = 20.0) const { return ratio_h_over_h2 >= lo && ratio_h_over_h2 <= hi; }
};

/// Runs the four step sizes concurrently. Each run is independent; nothing is shared.
template <TransmissionEnvelope Env>
ConvergenceStudy convergence_study(const State9& initial, double step_days, double horizon_days,
                                   const EpidemicParams& p, const Env& env, const GainHyperParams& hp)
{
    ConvergenceStudy study;
    study.step_days = step_days;
    study.horizon_days = horizon_days;
    std::vector<std::future<State9::Array>> jobs;
    for (int k = 0; k < 4; ++k) {
        const double h = step_days / static_cast<double>(1 << k);
        study.steps.push_back(h);
        jobs.push_back(std::async(std::launch::async, [=, &p, &env, &hp] {
            IntegrationConfig cfg{h, horizon_days, 1};
            return integrate_endpoint(initial, cfg, p, env, hp).to_array();
        }));
    }
    std::vector<State9::Array> ends;
    for (auto& j : jobs) {
        ends.push_back(j.get());
    }
    for (int k = 0; k < 3; ++k) {
        double e = 0.0;
        for (std::size_t i = 0; i < 9; ++i) {
            e = std::max(e, std::abs(ends[k][i] - ends[3][i]));
        }
        study.errors.push_back(e);
    }
    study.ratio_h_over_h2 = study.errors[1] > 0.0 ? study.errors[0] / study.errors[1] : 0.0;
    return study;
}

inline nlohmann::json to_json(const ConvergenceStudy& s)
{
    return {{"step_days", s.step_days},
            {"horizon_days", s.horizon_days},
            {"steps_days", s.steps},
            {"endpoint_errors_vs_finest", s.errors},
            {"ratio_h_over_h2", s.ratio_h_over_h2},
            {"order4_band", {12.0, 20.0}},
            {"status", s.order4() ? "pass" : "fail"}};
}

} // namespace ivobs
