#pragma once

/// \file ctxcalc/cli.hpp
///
/// The `ctxcalc` command line:
///
///     ctxcalc eval|sweep|validate|simulate|figures [scenario] [--out DIR]
///             [--format csv|json] [--chart] [--trials N] [--seed S] [--partitions P]
///
/// Data goes to the output stream or to files; diagnostics go to the error
/// stream. Exit codes: 0 ok, 2 config/usage, 3 math domain, 4 I/O,
/// 5 validation failure.

#include <ctxcalc/errors.hpp>
#include <ctxcalc/figures.hpp>
#include <ctxcalc/format.hpp>
#include <ctxcalc/model.hpp>
#include <ctxcalc/montecarlo.hpp>
#include <ctxcalc/scenario.hpp>
#include <ctxcalc/svg.hpp>
#include <ctxcalc/sweep.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ctxcalc::cli {

enum exit_code : int
{
    exit_ok = 0,
    exit_internal = 1,
    exit_config = 2,
    exit_domain = 3,
    exit_io = 4,
    exit_validation_failed = 5
};

/// Environment variable overriding the default output directory.
inline constexpr const char* out_dir_env = "CTXCALC_OUT_DIR";

using env_lookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name)
{
    if (const char* v = std::getenv(name.c_str()))
    {
        return std::string(v);
    }
    return std::nullopt;
}

struct options
{
    std::string command;
    std::string scenario_path;
    std::optional<std::string> out_dir;
    std::string format = "json";
    bool chart = false;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> partitions;
};

namespace detail {

namespace fs = std::filesystem;

inline fs::path ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
    {
        throw io_error("cannot create output directory '" + dir + "'"
                       + (ec ? ": " + ec.message() : std::string()));
    }
    return fs::path(dir);
}

inline void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
    {
        throw io_error("cannot open '" + path.string() + "' for writing");
    }
    f << content;
    f.flush();
    if (!f)
    {
        throw io_error("failed writing '" + path.string() + "'");
    }
}

inline std::string default_out_dir(const options& opt, const env_lookup& env)
{
    if (opt.out_dir)
    {
        return *opt.out_dir;
    }
    if (auto v = env(out_dir_env); v && !v->empty())
    {
        return *v;
    }
    return ".";
}

inline std::string eval_document(const system_config& config, const std::string& format)
{
    const auto shared = rci_shared(config);
    const auto separate = rci_separate(config);
    const double ratio = rci_ratio(config);
    const auto& lat = config.latency();
    const double m_shared = config.memory().shared_window();
    const double m_separate = config.memory().max_separate_window();
    const double ts = t_shared(lat, m_shared);
    const double tp = t_separate(lat, m_separate);
    const double tr = response_time_ratio(lat, m_shared, m_separate);

    if (format == "csv")
    {
        std::string out = "metric,value\n";
        auto row = [&out](const char* k, double v) { out += std::string(k) + "," + format_number(v) + "\n"; };
        row("rci_shared", shared.value);
        row("rci_shared_in_domain", shared.in_probability_domain ? 1 : 0);
        row("rci_separate", separate.value);
        row("rci_separate_in_domain", separate.in_probability_domain ? 1 : 0);
        row("rci_ratio", ratio);
        row("t_shared", ts);
        row("t_separate", tp);
        row("time_ratio", tr);
        return out;
    }
    ordered_json j;
    j["rci_shared"] = to_json(shared);
    j["rci_separate"] = to_json(separate);
    j["rci_ratio"] = ratio;
    j["t_shared"] = ts;
    j["t_separate"] = tp;
    j["time_ratio"] = tr;
    return j.dump(2) + "\n";
}

inline sweep_table sweep_scenario(const scenario& sc)
{
    if (!sc.sweep)
    {
        throw config_error("scenario has no sweep block");
    }
    return run_sweep(sweep_spec{sc.config, sc.sweep->parameter, sc.sweep->grid, sc.sweep->outputs});
}

/// Writes <dir>/<stem>.csv and, when `chart`, <dir>/<stem>.svg.
inline void write_sweep_outputs(const sweep_table& table, const fs::path& dir, const std::string& stem,
                                const std::string& title, bool chart)
{
    write_file(dir / (stem + ".csv"), to_csv(table));
    if (chart)
    {
        write_file(dir / (stem + ".svg"), render_svg(chart_from_table(table, title)));
    }
}

inline validate_options validation_settings(const scenario& sc, const options& opt)
{
    validate_options v;
    v.trials = opt.trials.value_or(sc.simulation.trials);
    v.partitions = opt.partitions.value_or(sc.simulation.partitions);
    v.sigma_threshold = sc.simulation.sigma_threshold;
    return v;
}

} // namespace detail

//
// Subcommands
//

inline int cmd_eval(const options& opt, std::ostream& out)
{
    const auto sc = load_scenario(opt.scenario_path);
    const auto doc = detail::eval_document(sc.config, opt.format);
    if (opt.out_dir)
    {
        detail::write_file(detail::ensure_dir(*opt.out_dir) / ("eval." + opt.format), doc);
    }
    out << doc;
    return exit_ok;
}

inline int cmd_sweep(const options& opt, const env_lookup& env)
{
    const auto sc = load_scenario(opt.scenario_path);
    const auto table = detail::sweep_scenario(sc);
    const auto dir = detail::ensure_dir(detail::default_out_dir(opt, env));
    const auto stem = std::filesystem::path(opt.scenario_path).stem().string();
    detail::write_sweep_outputs(table, dir, stem, stem, opt.chart || sc.sweep->chart);
    return exit_ok;
}

inline int cmd_validate(const options& opt, std::ostream& out)
{
    const auto sc = load_scenario(opt.scenario_path);
    const auto vopts = detail::validation_settings(sc, opt);
    const auto report = validate(sc.config, vopts, rng_spec{opt.seed.value_or(sc.simulation.seed), 0});
    const auto doc = to_json(report).dump(2) + "\n";
    if (opt.out_dir)
    {
        detail::write_file(detail::ensure_dir(*opt.out_dir) / "validation_report.json", doc);
    }
    out << doc;
    return report.all_passed() ? exit_ok : exit_validation_failed;
}

inline int cmd_simulate(const options& opt, std::ostream& out)
{
    const auto sc = load_scenario(opt.scenario_path);
    const auto v = detail::validation_settings(sc, opt);
    const sim_options sim{v.trials, v.partitions};
    const rng_spec rng{opt.seed.value_or(sc.simulation.seed), 0};
    const auto shared = estimate_rci(sc.config, context_mode::shared, sim, rng.child(0));
    const auto separate = estimate_rci(sc.config, context_mode::separate, sim, rng.child(1));
    const double shared_analytic = rci_shared(sc.config).value;
    const double separate_analytic = rci_separate(sc.config).value;

    std::string doc;
    if (opt.format == "csv")
    {
        doc = "mode,mean,std_error,analytic,trials\n";
        auto row = [&doc](const char* mode, const sim_estimate& e, double analytic) {
            doc += std::string(mode) + "," + format_number(e.mean) + "," + format_number(e.std_error) + ","
                   + format_number(analytic) + "," + std::to_string(e.trials) + "\n";
        };
        row("shared", shared, shared_analytic);
        row("separate", separate, separate_analytic);
    }
    else
    {
        ordered_json j;
        j["shared"] = to_json(shared);
        j["shared"]["analytic"] = shared_analytic;
        j["separate"] = to_json(separate);
        j["separate"]["analytic"] = separate_analytic;
        doc = j.dump(2) + "\n";
    }
    if (opt.out_dir)
    {
        detail::write_file(detail::ensure_dir(*opt.out_dir) / ("simulate." + opt.format), doc);
    }
    out << doc;
    return exit_ok;
}

inline int cmd_figures(const options& opt, const env_lookup& env)
{
    const auto dir = detail::ensure_dir(detail::default_out_dir(opt, env));
    for (const auto& fig : bundled_figures)
    {
        const auto sc = parse_scenario(std::string(fig.scenario_text));
        detail::write_sweep_outputs(detail::sweep_scenario(sc), dir, std::string(fig.name), std::string(fig.title),
                                    true);
    }
    return exit_ok;
}

/// Parses `args` (args[0] is the program name) and dispatches.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               const env_lookup& env = process_env)
{
    options opt;
    CLI::App app{"Consistency and response-time model for shared vs separate agent contexts", "ctxcalc"};
    app.require_subcommand(1);

    auto add_common = [&opt](CLI::App* sub, bool needs_scenario) {
        if (needs_scenario)
        {
            sub->add_option("scenario", opt.scenario_path, "Scenario file (YAML, schema 1)")->required();
        }
        sub->add_option("--out", opt.out_dir, "Output directory");
    };
    auto add_format = [&opt](CLI::App* sub) {
        sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    };
    auto add_sim = [&opt](CLI::App* sub) {
        sub->add_option("--trials", opt.trials, "Monte Carlo trials per component");
        sub->add_option("--seed", opt.seed, "RNG seed");
        sub->add_option("--partitions", opt.partitions, "Trial partitions (one worker thread each)")
            ->check(CLI::Range(1u, 4096u));
    };

    auto* eval = app.add_subcommand("eval", "Evaluate RCI and response-time metrics");
    add_common(eval, true);
    add_format(eval);
    auto* sweep = app.add_subcommand("sweep", "Run the scenario's sweep block and write CSV (and SVG)");
    add_common(sweep, true);
    sweep->add_flag("--chart", opt.chart, "Also write an SVG line chart");
    auto* val = app.add_subcommand("validate", "Cross-validate closed forms against Monte Carlo estimates");
    add_common(val, true);
    add_sim(val);
    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates of both RCI values");
    add_common(sim, true);
    add_format(sim);
    add_sim(sim);
    auto* figs = app.add_subcommand("figures", "Regenerate the bundled figure datasets and charts");
    add_common(figs, false);

    std::vector<const char*> argv;
    for (const auto& a : args)
    {
        argv.push_back(a.c_str());
    }
    try
    {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? exit_ok : exit_config;
    }

    try
    {
        if (eval->parsed())
        {
            return cmd_eval(opt, out);
        }
        if (sweep->parsed())
        {
            return cmd_sweep(opt, env);
        }
        if (val->parsed())
        {
            return cmd_validate(opt, out);
        }
        if (sim->parsed())
        {
            return cmd_simulate(opt, out);
        }
        return cmd_figures(opt, env);
    }
    catch (const zero_denominator_error& e)
    {
        err << "ctxcalc: zero denominator: " << e.what() << "\n";
        return exit_domain;
    }
    catch (const math_domain_error& e)
    {
        err << "ctxcalc: domain error: " << e.what() << "\n";
        return exit_domain;
    }
    catch (const config_error& e)
    {
        err << "ctxcalc: config error: " << e.what() << "\n";
        return exit_config;
    }
    catch (const io_error& e)
    {
        err << "ctxcalc: I/O error: " << e.what() << "\n";
        return exit_io;
    }
    catch (const std::exception& e)
    {
        err << "ctxcalc: internal error: " << e.what() << "\n";
        return exit_internal;
    }
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

} // namespace ctxcalc::cli
