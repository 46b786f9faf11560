#pragma once

/// \file ctxcalc/scenario.hpp
///
/// Scenario documents (YAML, `schema: 1`).
///
///     schema: 1
///     topics:
///       - {lambda_correct: 0.5, lambda_noise: 0.5}
///       - {lambda_correct: 0.5, lambda_noise: 0.5}
///     correlations:            # rows, or one flat row-major list; default all 0
///       - [0.0, 0.3]
///       - [0.3, 0.0]
///     shared_window: 2
///     separate_windows: [2, 2] # optional, defaults to shared_window per topic
///     alpha: 1
///     beta: 0.5
///     n_agents: 2
///     sweep:                   # optional
///       parameter: memory_window
///       start: 0.25            # or `values: [...]`
///       stop: 10
///       step: 0.25
///       outputs: [rci_shared, rci_separate]
///       chart: true
///     simulation:              # optional
///       trials: 1000000
///       seed: 42
///       sigma_threshold: 4
///       partitions: 1
///
/// Errors are thrown as config_error naming the key and its 1-based line.

#include <ctxcalc/errors.hpp>
#include <ctxcalc/format.hpp>
#include <ctxcalc/model.hpp>
#include <ctxcalc/sweep.hpp>

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ctxcalc {

inline constexpr int scenario_schema_version = 1;

struct grid_range
{
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
};

struct sweep_block
{
    sweep_parameter parameter = sweep_parameter::memory_window;
    /// Set when the grid was given as start/stop/step.
    std::optional<grid_range> range;
    std::vector<double> grid;
    std::vector<sweep_output> outputs;
    bool chart = false;
};

struct simulation_block
{
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 42;
    double sigma_threshold = 4.0;
    unsigned partitions = 1;
};

struct scenario
{
    system_config config;
    bool explicit_separate_windows = false;
    std::optional<sweep_block> sweep;
    simulation_block simulation;
};

namespace detail {

class scenario_reader
{
public:
    scenario parse(const YAML::Node& root)
    {
        if (!root.IsMap())
        {
            fail(root, "<document>", "scenario must be a mapping");
        }
        check_keys(root, "<document>",
                   {"schema", "topics", "correlations", "shared_window", "separate_windows", "alpha", "beta",
                    "n_agents", "sweep", "simulation"});

        const auto schema = require(root, "schema", "<document>");
        if (integer(schema, "schema") != scenario_schema_version)
        {
            fail(schema, "schema", "unsupported schema version (expected 1)");
        }

        const auto topics_node = require(root, "topics", "<document>");
        if (!topics_node.IsSequence() || topics_node.size() == 0)
        {
            fail(topics_node, "topics", "must be a non-empty list");
        }
        std::vector<topic_rates> topics;
        for (const auto& t : topics_node)
        {
            if (!t.IsMap())
            {
                fail(t, "topics", "each topic must be a mapping");
            }
            check_keys(t, "topics", {"lambda_correct", "lambda_noise"});
            const double c = real(require(t, "lambda_correct", "topics"), "lambda_correct");
            const double n = real(require(t, "lambda_noise", "topics"), "lambda_noise");
            topics.push_back(guard(t, "topics", [&] { return topic_rates(c, n); }));
        }
        const std::size_t n = topics.size();

        correlation_matrix rho(n);
        if (const auto c = root["correlations"])
        {
            rho = guard(c, "correlations", [&] { return correlation_matrix(n, flatten_matrix(c, n)); });
        }

        const auto shared_node = require(root, "shared_window", "<document>");
        const double shared = real(shared_node, "shared_window");
        bool explicit_separate = false;
        std::vector<double> separate(n, shared);
        if (const auto s = root["separate_windows"])
        {
            separate = real_list(s, "separate_windows");
            if (separate.size() != n)
            {
                fail(s, "separate_windows", "expected " + std::to_string(n) + " entries (one per topic)");
            }
            explicit_separate = true;
        }
        auto memory = guard(shared_node, "shared_window", [&] { return memory_config(shared, separate); });

        const auto alpha_node = require(root, "alpha", "<document>");
        const double alpha = real(alpha_node, "alpha");
        const double beta = root["beta"] ? real(root["beta"], "beta") : 0.0;
        const auto agents = root["n_agents"] ? integer(root["n_agents"], "n_agents") : 0;
        if (agents < 0 || agents > 4294967295LL)
        {
            fail(root["n_agents"], "n_agents", "must be a nonnegative integer");
        }
        auto latency = guard(alpha_node, "alpha",
                             [&] { return latency_params(alpha, beta, static_cast<unsigned>(agents)); });

        scenario sc{system_config(std::move(topics), std::move(rho), std::move(memory), latency),
                    explicit_separate, std::nullopt, simulation_block{}};

        if (const auto sw = root["sweep"])
        {
            sc.sweep = parse_sweep(sw);
        }
        if (const auto sim = root["simulation"])
        {
            sc.simulation = parse_simulation(sim);
        }
        return sc;
    }

private:
    [[noreturn]] static void fail(const YAML::Node& node, const std::string& key, const std::string& message)
    {
        std::string where = "scenario";
        if (node.IsDefined() && node.Mark().line >= 0)
        {
            where += ": line " + std::to_string(node.Mark().line + 1);
        }
        throw config_error(where + ": key '" + key + "': " + message);
    }

    template <typename F>
    static auto guard(const YAML::Node& node, const std::string& key, F f) -> decltype(f())
    {
        try
        {
            return f();
        }
        catch (const config_error& e)
        {
            fail(node, key, e.what());
        }
    }

    static YAML::Node require(const YAML::Node& parent, const std::string& key, const std::string& context)
    {
        auto node = parent[key];
        if (!node)
        {
            fail(parent, key, "missing (required in " + context + ")");
        }
        return node;
    }

    static void check_keys(const YAML::Node& map, const std::string& context, std::set<std::string> allowed)
    {
        for (const auto& kv : map)
        {
            const auto k = kv.first.as<std::string>();
            if (!allowed.count(k))
            {
                fail(kv.first, k, "unknown key in " + context);
            }
        }
    }

    static double real(const YAML::Node& node, const std::string& key)
    {
        if (!node.IsScalar())
        {
            fail(node, key, "expected a number");
        }
        try
        {
            return node.as<double>();
        }
        catch (const YAML::Exception&)
        {
            fail(node, key, "expected a number, got '" + node.Scalar() + "'");
        }
    }

    static long long integer(const YAML::Node& node, const std::string& key)
    {
        if (!node.IsScalar())
        {
            fail(node, key, "expected an integer");
        }
        try
        {
            return node.as<long long>();
        }
        catch (const YAML::Exception&)
        {
            fail(node, key, "expected an integer, got '" + node.Scalar() + "'");
        }
    }

    static std::uint64_t unsigned64(const YAML::Node& node, const std::string& key)
    {
        if (!node.IsScalar())
        {
            fail(node, key, "expected a nonnegative integer");
        }
        try
        {
            return node.as<std::uint64_t>();
        }
        catch (const YAML::Exception&)
        {
            fail(node, key, "expected a nonnegative integer, got '" + node.Scalar() + "'");
        }
    }

    static std::vector<double> real_list(const YAML::Node& node, const std::string& key)
    {
        if (!node.IsSequence())
        {
            fail(node, key, "expected a list of numbers");
        }
        std::vector<double> out;
        for (const auto& v : node)
        {
            out.push_back(real(v, key));
        }
        return out;
    }

    static std::vector<double> flatten_matrix(const YAML::Node& node, std::size_t n)
    {
        if (!node.IsSequence())
        {
            fail(node, "correlations", "expected a list of rows or a flat row-major list");
        }
        const bool nested = node.size() > 0 && node[0].IsSequence();
        if (!nested)
        {
            auto flat = real_list(node, "correlations");
            if (flat.size() != n * n)
            {
                fail(node, "correlations", "expected " + std::to_string(n * n) + " entries for "
                                               + std::to_string(n) + " topics");
            }
            return flat;
        }
        if (node.size() != n)
        {
            fail(node, "correlations", "expected " + std::to_string(n) + " rows for " + std::to_string(n)
                                           + " topics");
        }
        std::vector<double> flat;
        for (const auto& row : node)
        {
            auto r = real_list(row, "correlations");
            if (r.size() != n)
            {
                fail(row, "correlations", "expected " + std::to_string(n) + " columns");
            }
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return flat;
    }

    static sweep_block parse_sweep(const YAML::Node& node)
    {
        if (!node.IsMap())
        {
            fail(node, "sweep", "must be a mapping");
        }
        check_keys(node, "sweep", {"parameter", "start", "stop", "step", "values", "outputs", "chart"});
        sweep_block sb;

        const auto p = require(node, "parameter", "sweep");
        const auto parsed = parse_sweep_parameter(p.as<std::string>());
        if (!parsed)
        {
            fail(p, "parameter", "unknown sweep parameter '" + p.as<std::string>()
                                     + "' (memory_window, noise_ratio, n_agents, rho)");
        }
        sb.parameter = *parsed;

        const bool has_range = node["start"] || node["stop"] || node["step"];
        if (const auto values = node["values"])
        {
            if (has_range)
            {
                fail(values, "values", "give either values or start/stop/step, not both");
            }
            sb.grid = real_list(values, "values");
        }
        else if (has_range)
        {
            grid_range r;
            r.start = real(require(node, "start", "sweep"), "start");
            r.stop = real(require(node, "stop", "sweep"), "stop");
            r.step = real(require(node, "step", "sweep"), "step");
            sb.grid = guard(node["step"], "step", [&] { return make_grid(r.start, r.stop, r.step); });
            sb.range = r;
        }
        else
        {
            fail(node, "sweep", "needs values or start/stop/step");
        }
        if (sb.grid.empty())
        {
            fail(node, "sweep", "empty grid");
        }

        if (const auto outs = node["outputs"])
        {
            if (!outs.IsSequence())
            {
                fail(outs, "outputs", "expected a list of output names");
            }
            for (const auto& o : outs)
            {
                const auto name = o.as<std::string>();
                const auto out = parse_sweep_output(name);
                if (!out)
                {
                    fail(o, "outputs", "unknown output '" + name + "'");
                }
                sb.outputs.push_back(*out);
            }
        }
        else
        {
            sb.outputs = {sweep_output::rci_shared, sweep_output::rci_separate};
        }
        if (sb.outputs.empty())
        {
            fail(node, "outputs", "at least one output is required");
        }
        if (const auto c = node["chart"])
        {
            try
            {
                sb.chart = c.as<bool>();
            }
            catch (const YAML::Exception&)
            {
                fail(c, "chart", "expected true or false");
            }
        }
        return sb;
    }

    static simulation_block parse_simulation(const YAML::Node& node)
    {
        if (!node.IsMap())
        {
            fail(node, "simulation", "must be a mapping");
        }
        check_keys(node, "simulation", {"trials", "seed", "sigma_threshold", "partitions"});
        simulation_block sim;
        if (const auto t = node["trials"])
        {
            sim.trials = unsigned64(t, "trials");
        }
        if (const auto s = node["seed"])
        {
            sim.seed = unsigned64(s, "seed");
        }
        if (const auto s = node["sigma_threshold"])
        {
            sim.sigma_threshold = real(s, "sigma_threshold");
            if (!(sim.sigma_threshold > 0.0))
            {
                fail(s, "sigma_threshold", "must be positive");
            }
        }
        if (const auto p = node["partitions"])
        {
            const auto parts = unsigned64(p, "partitions");
            if (parts < 1 || parts > 4096)
            {
                fail(p, "partitions", "must be between 1 and 4096");
            }
            sim.partitions = static_cast<unsigned>(parts);
        }
        return sim;
    }
};

} // namespace detail

inline scenario parse_scenario(const std::string& text)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (const YAML::ParserException& e)
    {
        throw config_error("scenario: line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    return detail::scenario_reader{}.parse(root);
}

inline scenario load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw config_error("cannot read scenario file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

namespace detail {

inline std::string number_list(std::span<const double> v)
{
    std::string out = "[";
    for (std::size_t k = 0; k < v.size(); ++k)
    {
        out += (k ? ", " : "") + format_number(v[k]);
    }
    return out + "]";
}

} // namespace detail

/// Serialises a scenario back to the document format, numbers at 12
/// significant digits.
inline std::string write_scenario(const scenario& sc)
{
    const auto& c = sc.config;
    std::string out = "schema: 1\ntopics:\n";
    for (const auto& t : c.topics())
    {
        out += "  - {lambda_correct: " + format_number(t.lambda_correct())
               + ", lambda_noise: " + format_number(t.lambda_noise()) + "}\n";
    }
    out += "correlations:\n";
    const auto rm = c.correlations().row_major();
    for (std::size_t i = 0; i < c.n_topics(); ++i)
    {
        out += "  - " + detail::number_list(rm.subspan(i * c.n_topics(), c.n_topics())) + "\n";
    }
    out += "shared_window: " + format_number(c.memory().shared_window()) + "\n";
    if (sc.explicit_separate_windows)
    {
        out += "separate_windows: " + detail::number_list(c.memory().separate_windows()) + "\n";
    }
    out += "alpha: " + format_number(c.latency().alpha()) + "\n";
    out += "beta: " + format_number(c.latency().beta()) + "\n";
    out += "n_agents: " + std::to_string(c.latency().n_agents()) + "\n";
    if (sc.sweep)
    {
        const auto& s = *sc.sweep;
        out += "sweep:\n  parameter: " + std::string(to_string(s.parameter)) + "\n";
        if (s.range)
        {
            out += "  start: " + format_number(s.range->start) + "\n";
            out += "  stop: " + format_number(s.range->stop) + "\n";
            out += "  step: " + format_number(s.range->step) + "\n";
        }
        else
        {
            out += "  values: " + detail::number_list(s.grid) + "\n";
        }
        out += "  outputs: [";
        for (std::size_t k = 0; k < s.outputs.size(); ++k)
        {
            out += (k ? ", " : "") + std::string(to_string(s.outputs[k]));
        }
        out += "]\n";
        out += std::string("  chart: ") + (s.chart ? "true" : "false") + "\n";
    }
    const auto& sim = sc.simulation;
    out += "simulation:\n";
    out += "  trials: " + std::to_string(sim.trials) + "\n";
    out += "  seed: " + std::to_string(sim.seed) + "\n";
    out += "  sigma_threshold: " + format_number(sim.sigma_threshold) + "\n";
    out += "  partitions: " + std::to_string(sim.partitions) + "\n";
    return out;
}

} // namespace ctxcalc
