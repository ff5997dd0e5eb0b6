/// @file scenario.hpp
/// @brief Scenario configuration: JSON loading, validation, and the built-in reference preset.
///
/// Time-valued keys come in `<name>_days` / `<name>_years` pairs (exactly one may be given);
/// everything is stored in days, with 365 days per year. Unknown keys are rejected so that
/// typos surface as validation errors instead of silently falling back to defaults.

#pragma once

#include "ivobs/envelope.hpp"
#include "ivobs/errors.hpp"
#include "ivobs/integrator.hpp"
#include "ivobs/model.hpp"
#include "ivobs/observer.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ivobs {

inline constexpr double kDaysPerYear = 365.0;

struct OutputPaths {
    std::string dir = "out";
    std::string trace = "trace.csv";
    std::string report = "report.json";
};

struct ScenarioConfig {
    std::string name = "custom";
    EpidemicParams params;
    AnyEnvelope envelope;
    GainHyperParams gains;
    State9 initial;
    IntegrationConfig integration;
    OutputPaths output;
};

namespace detail {

using nlohmann::json;

class ConfigReader {
public:
    std::vector<ValidationIssue> issues;

    void issue(const std::string& field, const std::string& rule) { issues.push_back({field, rule}); }

    const json* object(const json& parent, const std::string& key, const std::string& path, bool required = true)
    {
        if (!parent.contains(key)) {
            if (required) {
                issue(join(path, key), "is required");
            }
            return nullptr;
        }
        const json& v = parent.at(key);
        if (!v.is_object()) {
            issue(join(path, key), "must be an object");
            return nullptr;
        }
        return &v;
    }

    void number(const json& obj, const std::string& key, const std::string& path, double& target,
                bool required = true)
    {
        if (!obj.contains(key)) {
            if (required) {
                issue(join(path, key), "is required");
            }
            return;
        }
        const json& v = obj.at(key);
        if (!v.is_number()) {
            issue(join(path, key), "must be a number");
            return;
        }
        target = v.get<double>();
    }

    /// Reads `<base>_days` or `<base>_years` into `days`.
    void duration(const json& obj, const std::string& base, const std::string& path, double& days,
                  bool required = true)
    {
        const std::string kd = base + "_days";
        const std::string ky = base + "_years";
        const bool has_d = obj.contains(kd);
        const bool has_y = obj.contains(ky);
        if (has_d && has_y) {
            issue(join(path, base), "give either " + kd + " or " + ky + ", not both");
            return;
        }
        if (has_d) {
            number(obj, kd, path, days);
        } else if (has_y) {
            double years = 0.0;
            number(obj, ky, path, years);
            days = years * kDaysPerYear;
        } else if (required) {
            issue(join(path, base), "is required (as " + kd + " or " + ky + ")");
        }
    }

    void string(const json& obj, const std::string& key, const std::string& path, std::string& target)
    {
        if (!obj.contains(key)) {
            return;
        }
        const json& v = obj.at(key);
        if (!v.is_string()) {
            issue(join(path, key), "must be a string");
            return;
        }
        target = v.get<std::string>();
    }

    void only_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed)
    {
        for (const auto& [key, _] : obj.items()) {
            if (!allowed.count(key)) {
                issue(join(path, key), "unknown key");
            }
        }
    }

    static std::string join(const std::string& path, const std::string& key)
    {
        return path.empty() ? key : path + "." + key;
    }
};

inline void read_rates(ConfigReader& rd, const json& obj, const std::string& path, TransmissionRates& r)
{
    rd.number(obj, "beta_vh_lo", path, r.beta_vh_lo);
    rd.number(obj, "beta_vh", path, r.beta_vh);
    rd.number(obj, "beta_vh_hi", path, r.beta_vh_hi);
    rd.number(obj, "beta_hv_lo", path, r.beta_hv_lo);
    rd.number(obj, "beta_hv", path, r.beta_hv);
    rd.number(obj, "beta_hv_hi", path, r.beta_hv_hi);
}

inline void check_rates(ConfigReader& rd, const TransmissionRates& r, const std::string& path)
{
    const std::pair<const char*, double> all[] = {{"beta_vh_lo", r.beta_vh_lo}, {"beta_vh", r.beta_vh},
                                                  {"beta_vh_hi", r.beta_vh_hi}, {"beta_hv_lo", r.beta_hv_lo},
                                                  {"beta_hv", r.beta_hv},       {"beta_hv_hi", r.beta_hv_hi}};
    for (const auto& [name, v] : all) {
        if (!(std::isfinite(v) && v >= 0.0)) {
            rd.issue(ConfigReader::join(path, name), "must be finite and >= 0");
        }
    }
    if (!(r.beta_vh_lo <= r.beta_vh && r.beta_vh <= r.beta_vh_hi)) {
        rd.issue(path, "requires beta_vh_lo <= beta_vh <= beta_vh_hi");
    }
    if (!(r.beta_hv_lo <= r.beta_hv && r.beta_hv <= r.beta_hv_hi)) {
        rd.issue(path, "requires beta_hv_lo <= beta_hv <= beta_hv_hi");
    }
}

inline std::optional<AnyEnvelope> read_envelope(ConfigReader& rd, const json& obj)
{
    const std::string path = "envelope";
    std::string kind;
    rd.string(obj, "kind", path, kind);
    if (kind == "seasonal") {
        rd.only_keys(obj, path,
                     {"kind", "beta_vh_0", "beta_hv_0", "amplitude", "period_days", "period_years", "uncertainty"});
        SeasonalEnvelope env;
        rd.number(obj, "beta_vh_0", path, env.beta_vh_0);
        rd.number(obj, "beta_hv_0", path, env.beta_hv_0);
        rd.number(obj, "amplitude", path, env.amplitude, false);
        rd.duration(obj, "period", path, env.period_days, false);
        rd.number(obj, "uncertainty", path, env.uncertainty, false);
        if (!(std::isfinite(env.beta_vh_0) && env.beta_vh_0 >= 0.0)) {
            rd.issue("envelope.beta_vh_0", "must be finite and >= 0");
        }
        if (!(std::isfinite(env.beta_hv_0) && env.beta_hv_0 >= 0.0)) {
            rd.issue("envelope.beta_hv_0", "must be finite and >= 0");
        }
        if (!(env.amplitude >= 0.0 && env.amplitude < 1.0)) {
            rd.issue("envelope.amplitude", "must satisfy 0 <= amplitude < 1");
        }
        if (!(env.uncertainty >= 0.0 && env.uncertainty < 1.0)) {
            rd.issue("envelope.uncertainty", "must satisfy 0 <= uncertainty < 1");
        }
        if (!(std::isfinite(env.period_days) && env.period_days > 0.0)) {
            rd.issue("envelope.period", "must be > 0");
        }
        return AnyEnvelope(env);
    }
    if (kind == "piecewise_constant") {
        rd.only_keys(obj, path, {"kind", "rows"});
        if (!obj.contains("rows") || !obj.at("rows").is_array() || obj.at("rows").empty()) {
            rd.issue("envelope.rows", "must be a non-empty array");
            return std::nullopt;
        }
        std::vector<PiecewiseConstantEnvelope::Row> rows;
        const std::size_t before = rd.issues.size();
        for (std::size_t i = 0; i < obj.at("rows").size(); ++i) {
            const std::string rp = "envelope.rows[" + std::to_string(i) + "]";
            const json& row = obj.at("rows")[i];
            if (!row.is_object()) {
                rd.issue(rp, "must be an object");
                continue;
            }
            rd.only_keys(row, rp,
                         {"t_days", "t_years", "beta_vh_lo", "beta_vh", "beta_vh_hi", "beta_hv_lo", "beta_hv",
                          "beta_hv_hi"});
            PiecewiseConstantEnvelope::Row r;
            rd.duration(row, "t", rp, r.t_days);
            read_rates(rd, row, rp, r.rates);
            check_rates(rd, r.rates, rp);
            if (!rows.empty() && !(r.t_days > rows.back().t_days)) {
                rd.issue(rp + ".t", "breakpoint times must be strictly increasing");
            }
            rows.push_back(r);
        }
        if (rd.issues.size() != before) {
            return std::nullopt;
        }
        return AnyEnvelope(PiecewiseConstantEnvelope(std::move(rows)));
    }
    rd.issue("envelope.kind", "must be \"seasonal\" or \"piecewise_constant\"");
    return std::nullopt;
}

/// Beta bounds at t; used for the gain feasibility checks (nonzero beta_vh bounds).
inline void check_envelope_feasibility(ConfigReader& rd, const AnyEnvelope& env, double horizon_days)
{
    if (const auto* s = std::get_if<SeasonalEnvelope>(&env.variant())) {
        if (!(s->beta_vh_0 > 0.0)) {
            rd.issue("envelope.beta_vh_0", "must be > 0 (the gains divide by the beta_vh bounds)");
        }
        return;
    }
    if (const auto* pc = std::get_if<PiecewiseConstantEnvelope>(&env.variant())) {
        for (std::size_t i = 0; i < pc->rows().size(); ++i) {
            const auto& row = pc->rows()[i];
            const bool starts_in_time = i == 0 || row.t_days <= horizon_days;
            const bool ends_after_zero = i + 1 == pc->rows().size() || pc->rows()[i + 1].t_days > 0.0;
            if (starts_in_time && ends_after_zero && !(row.rates.beta_vh_lo > 0.0)) {
                rd.issue("envelope.rows[" + std::to_string(i) + "].beta_vh_lo",
                         "must be > 0 (the gains divide by the beta_vh bounds)");
            }
        }
    }
}

} // namespace detail

/// Semantic rules on an assembled configuration, each reported against its field path.
inline std::vector<ValidationIssue> validate_config(const ScenarioConfig& cfg)
{
    detail::ConfigReader rd;
    const auto& p = cfg.params;
    const std::pair<const char*, double> rates[] = {{"params.mu_h", p.mu_h}, {"params.mu_v", p.mu_v},
                                                    {"params.gamma", p.gamma}};
    bool rates_ok = true;
    for (const auto& [name, v] : rates) {
        if (!(std::isfinite(v) && v > 0.0)) {
            rd.issue(name, "must be finite and > 0");
            rates_ok = false;
        }
    }
    if (rates_ok && !(p.mu_h < p.gamma)) {
        rd.issue("params.mu_h", "must be < gamma (host turnover slower than recovery)");
    }
    if (rates_ok && !(p.mu_h < p.mu_v)) {
        rd.issue("params.mu_h", "must be < mu_v (host turnover slower than vector turnover)");
    }

    const auto& g = cfg.gains;
    const std::pair<const char*, double> hyper[] = {{"gains.omega1", g.omega1},     {"gains.omega2", g.omega2},
                                                    {"gains.eps_obs1", g.eps_obs1}, {"gains.eps_obs2", g.eps_obs2},
                                                    {"gains.eps1", g.eps1},         {"gains.eps2", g.eps2}};
    for (const auto& [name, v] : hyper) {
        if (!(std::isfinite(v) && v > 0.0)) {
            rd.issue(name, "must be finite and > 0");
        }
    }
    if (!(g.eps_obs1 < p.gamma)) {
        rd.issue("gains.eps_obs1", "must be < gamma so that the gain target stays positive");
    }
    if (!(g.eps_obs2 < p.gamma)) {
        rd.issue("gains.eps_obs2", "must be < gamma so that the gain target stays positive");
    }
    if (!(g.eps1 <= p.mu_h)) {
        rd.issue("gains.eps1", "must be <= mu_h (the floor condition must hold when y = 0)");
    }

    const auto& x = cfg.initial;
    const std::pair<const char*, double> comps[] = {
        {"initial.S_h", x.truth.S_h},         {"initial.I_h", x.truth.I_h},         {"initial.I_v", x.truth.I_v},
        {"initial.S_h_lo", x.obs.obs1.S_h_lo}, {"initial.I_h_hi", x.obs.obs1.I_h_hi}, {"initial.I_v_hi", x.obs.obs1.I_v_hi},
        {"initial.S_h_hi", x.obs.obs2.S_h_hi}, {"initial.I_h_lo", x.obs.obs2.I_h_lo}, {"initial.I_v_lo", x.obs.obs2.I_v_lo}};
    for (const auto& [name, v] : comps) {
        if (!(std::isfinite(v) && v >= 0.0)) {
            rd.issue(name, "must be finite and >= 0");
        }
    }
    if (!(x.truth.S_h + x.truth.I_h <= 1.0)) {
        rd.issue("initial", "requires S_h + I_h <= 1");
    }
    if (!(x.truth.I_v <= 1.0)) {
        rd.issue("initial.I_v", "must be <= 1");
    }
    const auto lo = x.obs.lower();
    const auto hi = x.obs.upper();
    if (!(lo.S_h <= x.truth.S_h && x.truth.S_h <= hi.S_h)) {
        rd.issue("initial.S_h_lo/S_h_hi", "ordering requires 0 <= S_h_lo <= S_h <= S_h_hi");
    }
    if (!(lo.I_h <= x.truth.I_h && x.truth.I_h <= hi.I_h)) {
        rd.issue("initial.I_h_lo/I_h_hi", "ordering requires 0 <= I_h_lo <= I_h <= I_h_hi");
    }
    if (!(lo.I_v <= x.truth.I_v && x.truth.I_v <= hi.I_v)) {
        rd.issue("initial.I_v_lo/I_v_hi", "ordering requires 0 <= I_v_lo <= I_v <= I_v_hi");
    }

    const auto& ic = cfg.integration;
    try {
        ic.validate();
    } catch (const InvalidInput& e) {
        rd.issue("integration", e.what());
    }

    detail::check_envelope_feasibility(rd, cfg.envelope, ic.horizon_days);

    if (cfg.output.trace.empty()) {
        rd.issue("output.trace", "must not be empty");
    }
    if (cfg.output.report.empty()) {
        rd.issue("output.report", "must not be empty");
    }
    return rd.issues;
}

/// Parses and validates; throws ConfigError listing every problem found.
inline ScenarioConfig parse_config(const nlohmann::json& doc)
{
    detail::ConfigReader rd;
    ScenarioConfig cfg;
    if (!doc.is_object()) {
        throw ConfigError("<root>", "must be a JSON object");
    }
    rd.only_keys(doc, "", {"name", "params", "envelope", "gains", "initial", "integration", "output"});
    rd.string(doc, "name", "", cfg.name);

    if (const auto* p = rd.object(doc, "params", "")) {
        rd.only_keys(*p, "params", {"mu_h", "mu_v", "gamma"});
        rd.number(*p, "mu_h", "params", cfg.params.mu_h);
        rd.number(*p, "mu_v", "params", cfg.params.mu_v);
        rd.number(*p, "gamma", "params", cfg.params.gamma);
    }
    std::optional<AnyEnvelope> env;
    if (const auto* e = rd.object(doc, "envelope", "")) {
        env = detail::read_envelope(rd, *e);
    }
    if (const auto* g = rd.object(doc, "gains", "", false)) {
        rd.only_keys(*g, "gains", {"omega1", "omega2", "eps_obs1", "eps_obs2", "eps1", "eps2"});
        rd.number(*g, "omega1", "gains", cfg.gains.omega1, false);
        rd.number(*g, "omega2", "gains", cfg.gains.omega2, false);
        rd.number(*g, "eps_obs1", "gains", cfg.gains.eps_obs1, false);
        rd.number(*g, "eps_obs2", "gains", cfg.gains.eps_obs2, false);
        rd.number(*g, "eps1", "gains", cfg.gains.eps1, false);
        rd.number(*g, "eps2", "gains", cfg.gains.eps2, false);
    }
    if (const auto* x = rd.object(doc, "initial", "")) {
        rd.only_keys(*x, "initial",
                     {"S_h", "I_h", "I_v", "S_h_lo", "S_h_hi", "I_h_lo", "I_h_hi", "I_v_lo", "I_v_hi"});
        auto& s = cfg.initial;
        rd.number(*x, "S_h", "initial", s.truth.S_h);
        rd.number(*x, "I_h", "initial", s.truth.I_h);
        rd.number(*x, "I_v", "initial", s.truth.I_v);
        rd.number(*x, "S_h_lo", "initial", s.obs.obs1.S_h_lo);
        rd.number(*x, "I_h_hi", "initial", s.obs.obs1.I_h_hi);
        rd.number(*x, "I_v_hi", "initial", s.obs.obs1.I_v_hi);
        rd.number(*x, "S_h_hi", "initial", s.obs.obs2.S_h_hi);
        rd.number(*x, "I_h_lo", "initial", s.obs.obs2.I_h_lo);
        rd.number(*x, "I_v_lo", "initial", s.obs.obs2.I_v_lo);
    }
    if (const auto* ic = rd.object(doc, "integration", "")) {
        rd.only_keys(*ic, "integration",
                     {"step_days", "step_years", "horizon_days", "horizon_years", "output_stride"});
        rd.duration(*ic, "step", "integration", cfg.integration.step_days, false);
        rd.duration(*ic, "horizon", "integration", cfg.integration.horizon_days);
        if (ic->contains("output_stride")) {
            const auto& v = ic->at("output_stride");
            if (!v.is_number_integer()) {
                rd.issue("integration.output_stride", "must be an integer");
            } else {
                cfg.integration.output_stride = v.get<std::int64_t>();
            }
        }
    }
    if (const auto* o = rd.object(doc, "output", "", false)) {
        rd.only_keys(*o, "output", {"dir", "trace", "report"});
        rd.string(*o, "dir", "output", cfg.output.dir);
        rd.string(*o, "trace", "output", cfg.output.trace);
        rd.string(*o, "report", "output", cfg.output.report);
    }

    if (!rd.issues.empty() || !env) {
        if (rd.issues.empty()) {
            rd.issue("envelope", "could not be constructed");
        }
        throw ConfigError(rd.issues);
    }
    cfg.envelope = *env;
    auto semantic = validate_config(cfg);
    if (!semantic.empty()) {
        throw ConfigError(std::move(semantic));
    }
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path, "cannot open file");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path, std::string("parse error: ") + e.what());
    }
    return parse_config(doc);
}

/// Canonical JSON form (all times in days); parse_config(to_json(cfg)) reproduces cfg.
inline nlohmann::json to_json(const ScenarioConfig& cfg)
{
    using nlohmann::json;
    json env;
    if (const auto* s = std::get_if<SeasonalEnvelope>(&cfg.envelope.variant())) {
        env = {{"kind", "seasonal"},        {"beta_vh_0", s->beta_vh_0},     {"beta_hv_0", s->beta_hv_0},
               {"amplitude", s->amplitude}, {"period_days", s->period_days}, {"uncertainty", s->uncertainty}};
    } else if (const auto* pc = std::get_if<PiecewiseConstantEnvelope>(&cfg.envelope.variant())) {
        json rows = json::array();
        for (const auto& r : pc->rows()) {
            rows.push_back({{"t_days", r.t_days},
                            {"beta_vh_lo", r.rates.beta_vh_lo},
                            {"beta_vh", r.rates.beta_vh},
                            {"beta_vh_hi", r.rates.beta_vh_hi},
                            {"beta_hv_lo", r.rates.beta_hv_lo},
                            {"beta_hv", r.rates.beta_hv},
                            {"beta_hv_hi", r.rates.beta_hv_hi}});
        }
        env = {{"kind", "piecewise_constant"}, {"rows", rows}};
    }
    const auto& x = cfg.initial;
    return {
        {"name", cfg.name},
        {"params", {{"mu_h", cfg.params.mu_h}, {"mu_v", cfg.params.mu_v}, {"gamma", cfg.params.gamma}}},
        {"envelope", env},
        {"gains",
         {{"omega1", cfg.gains.omega1},
          {"omega2", cfg.gains.omega2},
          {"eps_obs1", cfg.gains.eps_obs1},
          {"eps_obs2", cfg.gains.eps_obs2},
          {"eps1", cfg.gains.eps1},
          {"eps2", cfg.gains.eps2}}},
        {"initial",
         {{"S_h", x.truth.S_h},
          {"I_h", x.truth.I_h},
          {"I_v", x.truth.I_v},
          {"S_h_lo", x.obs.obs1.S_h_lo},
          {"S_h_hi", x.obs.obs2.S_h_hi},
          {"I_h_lo", x.obs.obs2.I_h_lo},
          {"I_h_hi", x.obs.obs1.I_h_hi},
          {"I_v_lo", x.obs.obs2.I_v_lo},
          {"I_v_hi", x.obs.obs1.I_v_hi}}},
        {"integration",
         {{"step_days", cfg.integration.step_days},
          {"horizon_days", cfg.integration.horizon_days},
          {"output_stride", cfg.integration.output_stride}}},
        {"output", {{"dir", cfg.output.dir}, {"trace", cfg.output.trace}, {"report", cfg.output.report}}},
    };
}

/// The reference vector-borne scenario: published rate constants, seasonal transmission with amplitude 0.4
/// and a one-year period, +/- `uncertainty` envelopes, and the reference initial bracket.
/// The horizon defaults to 5 years.
inline ScenarioConfig reference_preset(double uncertainty = 0.1, double horizon_years = 5.0)
{
    ScenarioConfig cfg;
    cfg.name = "paper-sec6";
    cfg.params = {3.4e-5, 0.025, 0.14};
    cfg.envelope = SeasonalEnvelope{0.2102, 0.1, 0.4, kDaysPerYear, uncertainty};
    cfg.gains = {1e5, 1e5, 1e-4, 1e-4, 1e-5, 1e-5};
    cfg.initial = {{0.2, 0.0, 0.005}, {{0.1, 0.01, 0.01}, {0.8, 0.0, 0.0}}};
    cfg.integration = {0.01, horizon_years * kDaysPerYear, 10};
    cfg.output = {};
    auto issues = validate_config(cfg);
    if (!issues.empty()) {
        throw ConfigError(std::move(issues));
    }
    return cfg;
}

} // namespace ivobs
