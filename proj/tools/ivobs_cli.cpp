// Command-line front end: run a scenario, run the reference preset, study step-halving
// convergence, or re-verify a recorded trace.

#include "ivobs/ivobs.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using ivobs::ExitCode;

struct Common {
    std::optional<std::string> out_dir;
    std::optional<double> step_days;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--out-dir", c.out_dir, "Directory for the trace, report and effective config");
    cmd->add_option("--step-days", c.step_days, "Override the integration step (days)");
    cmd->add_flag("--quiet", c.quiet, "Suppress the human-readable summary");
}

ivobs::ScenarioConfig apply_overrides(ivobs::ScenarioConfig cfg, const Common& c,
                                      std::optional<std::int64_t> stride)
{
    if (c.out_dir) {
        cfg.output.dir = *c.out_dir;
    }
    if (c.step_days) {
        cfg.integration.step_days = *c.step_days;
    }
    if (stride) {
        cfg.integration.output_stride = *stride;
    }
    auto issues = ivobs::validate_config(cfg);
    if (!issues.empty()) {
        throw ivobs::ConfigError(std::move(issues));
    }
    return cfg;
}

ivobs::ScenarioConfig resolve_config(const std::string& source)
{
    if (source == "paper-sec6") {
        return ivobs::reference_preset();
    }
    return ivobs::load_config(source);
}

void print_summary(const ivobs::VerificationResult& v)
{
    const auto& s = v.summary;
    std::cout << "samples: " << s.samples << ", t_final: " << s.t_final << " days\n";
    std::cout << "V1(T) = " << s.V_final.obs1 << " <= bound " << s.bound_final.obs1 << "\n";
    std::cout << "V2(T) = " << s.V_final.obs2 << " <= bound " << s.bound_final.obs2 << "\n";
    std::cout << "relative S_h width at T: " << s.rel_S_width_final
              << " (final-year mean " << s.rel_S_width_last_year << ")\n";
    for (const auto& t : v.violations.tallies()) {
        if (t.count > 0) {
            std::cout << "VIOLATION " << t.name << ": " << t.count << " samples, first at t = " << t.first_t
                      << ", worst " << t.worst << "\n";
        }
    }
    std::cout << (v.violations.total() == 0 ? "all checks passed" : "checks FAILED") << "\n";
}

int execute(const ivobs::ScenarioConfig& cfg, const Common& c)
{
    const auto outcome = ivobs::run_scenario(cfg);
    if (!c.quiet) {
        std::cout << "scenario: " << cfg.name << "\n";
        print_summary(outcome.trace.verification);
        std::cout << "trace:  " << outcome.trace_path.string() << "\nreport: " << outcome.report_path.string()
                  << "\n";
    }
    return static_cast<int>(outcome.exit_code);
}

int check_trace(const std::string& csv, const std::optional<std::string>& config_path, const Common& c)
{
    std::ifstream in(csv, std::ios::binary);
    if (!in) {
        throw ivobs::InvalidInput("cannot open " + csv);
    }
    const auto rows = ivobs::read_trace_csv(in);
    if (rows.empty()) {
        throw ivobs::InvalidInput(csv + " contains no samples");
    }
    const double spacing = ivobs::trace_spacing(rows);
    ivobs::VerificationResult result;
    if (config_path) {
        const auto cfg = ivobs::load_config(*config_path);
        const double horizon = rows.back().t_days;
        const auto rho = ivobs::rho_weights(cfg.gains, cfg.envelope, horizon);
        const ivobs::ModelContext<ivobs::AnyEnvelope> ctx{cfg.params, cfg.envelope, cfg.gains, rho};
        result = ivobs::verify_trace(rows, spacing, ctx);
    } else {
        result = ivobs::verify_trace(rows, spacing);
    }
    const auto report = ivobs::verification_to_json(result);
    if (c.out_dir) {
        std::filesystem::create_directories(*c.out_dir);
        std::ofstream(std::filesystem::path(*c.out_dir) / "check_report.json", std::ios::binary)
            << report.dump(2) << '\n';
    }
    if (!c.quiet) {
        print_summary(result);
    }
    return result.violations.total() == 0 ? 0 : static_cast<int>(ExitCode::violations);
}

int converge(const std::string& source, const Common& c, std::optional<double> horizon_days)
{
    auto cfg = resolve_config(source);
    const double h = c.step_days.value_or(cfg.integration.step_days);
    const double horizon = horizon_days.value_or(cfg.integration.horizon_days);
    ivobs::IntegrationConfig{h / 8.0, horizon, 1}.validate();
    ivobs::IntegrationConfig{h, horizon, 1}.validate();
    const auto study = ivobs::convergence_study(cfg.initial, h, horizon, cfg.params, cfg.envelope, cfg.gains);
    const auto report = ivobs::to_json(study);
    const std::string dir = c.out_dir.value_or(cfg.output.dir);
    std::filesystem::create_directories(dir);
    std::ofstream(std::filesystem::path(dir) / "converge.json", std::ios::binary) << report.dump(2) << '\n';
    if (!c.quiet) {
        std::cout << report.dump(2) << "\n";
    }
    return study.order4() ? 0 : static_cast<int>(ExitCode::violations);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Interval observers for an SIR-SI vector-borne epidemic model"};
    app.require_subcommand(1);

    Common run_opts;
    std::string run_config;
    std::optional<std::int64_t> run_stride;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario from a JSON configuration");
    run_cmd->add_option("config", run_config, "Configuration file")->required();
    run_cmd->add_option("--output-stride", run_stride, "Record every N steps");
    add_common(run_cmd, run_opts);

    Common preset_opts;
    std::string preset_name;
    double uncertainty = 0.1;
    double horizon_years = 5.0;
    std::optional<std::int64_t> preset_stride;
    auto* preset_cmd = app.add_subcommand("preset", "Run a built-in scenario");
    preset_cmd->add_option("name", preset_name, "Preset name")->required()->check(CLI::IsMember({"paper-sec6"}));
    preset_cmd->add_option("--uncertainty", uncertainty, "Relative half-width of the transmission envelopes");
    preset_cmd->add_option("--horizon-years", horizon_years, "Simulated horizon in years");
    preset_cmd->add_option("--output-stride", preset_stride, "Record every N steps");
    add_common(preset_cmd, preset_opts);

    Common conv_opts;
    std::string conv_config;
    std::optional<double> conv_horizon;
    auto* conv_cmd = app.add_subcommand("converge", "Step-halving study (h, h/2, h/4 against h/8)");
    conv_cmd->add_option("config", conv_config, "Configuration file, or the preset name paper-sec6")->required();
    conv_cmd->add_option("--horizon-days", conv_horizon, "Override the horizon (days)");
    add_common(conv_cmd, conv_opts);

    Common check_opts;
    std::string check_csv;
    std::optional<std::string> check_config;
    auto* check_cmd = app.add_subcommand("check", "Re-verify a recorded trace offline");
    check_cmd->add_option("trace", check_csv, "Trace CSV")->required();
    check_cmd->add_option("--config", check_config, "Configuration enabling the model-dependent checks");
    check_cmd->add_option("--out-dir", check_opts.out_dir, "Write check_report.json here");
    check_cmd->add_flag("--quiet", check_opts.quiet, "Suppress the human-readable summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::bad_input);
    }

    try {
        if (*run_cmd) {
            return execute(apply_overrides(ivobs::load_config(run_config), run_opts, run_stride), run_opts);
        }
        if (*preset_cmd) {
            if (!(uncertainty >= 0.0 && uncertainty < 1.0)) {
                throw ivobs::ConfigError("--uncertainty", "must satisfy 0 <= uncertainty < 1");
            }
            auto cfg = ivobs::reference_preset(uncertainty, horizon_years);
            return execute(apply_overrides(std::move(cfg), preset_opts, preset_stride), preset_opts);
        }
        if (*conv_cmd) {
            return converge(conv_config, conv_opts, conv_horizon);
        }
        if (*check_cmd) {
            return check_trace(check_csv, check_config, check_opts);
        }
    } catch (const ivobs::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return static_cast<int>(ExitCode::bad_input);
    } catch (const ivobs::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::bad_input);
    } catch (const ivobs::Error& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return static_cast<int>(ExitCode::run_failure);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::run_failure);
    }
    return 0;
}
