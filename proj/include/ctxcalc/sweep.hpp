#pragma once

/// \file ctxcalc/sweep.hpp
///
/// One-parameter sweeps over the closed forms and shape checks on the
/// resulting columns.

#include <ctxcalc/errors.hpp>
#include <ctxcalc/model.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ctxcalc {

enum class sweep_parameter
{
    memory_window,
    noise_ratio,
    n_agents,
    rho
};

enum class sweep_output
{
    rci_shared,
    rci_separate,
    rci_ratio,
    simplified_shared,
    simplified_separate,
    t_shared,
    t_separate,
    time_ratio
};

inline std::string_view to_string(sweep_parameter p)
{
    switch (p)
    {
    case sweep_parameter::memory_window: return "memory_window";
    case sweep_parameter::noise_ratio: return "noise_ratio";
    case sweep_parameter::n_agents: return "n_agents";
    case sweep_parameter::rho: return "rho";
    }
    return "?";
}

inline std::string_view to_string(sweep_output o)
{
    switch (o)
    {
    case sweep_output::rci_shared: return "rci_shared";
    case sweep_output::rci_separate: return "rci_separate";
    case sweep_output::rci_ratio: return "rci_ratio";
    case sweep_output::simplified_shared: return "simplified_shared";
    case sweep_output::simplified_separate: return "simplified_separate";
    case sweep_output::t_shared: return "t_shared";
    case sweep_output::t_separate: return "t_separate";
    case sweep_output::time_ratio: return "time_ratio";
    }
    return "?";
}

inline std::optional<sweep_parameter> parse_sweep_parameter(std::string_view s)
{
    for (auto p : {sweep_parameter::memory_window, sweep_parameter::noise_ratio, sweep_parameter::n_agents,
                   sweep_parameter::rho})
    {
        if (to_string(p) == s)
        {
            return p;
        }
    }
    return std::nullopt;
}

inline std::optional<sweep_output> parse_sweep_output(std::string_view s)
{
    for (auto o : {sweep_output::rci_shared, sweep_output::rci_separate, sweep_output::rci_ratio,
                   sweep_output::simplified_shared, sweep_output::simplified_separate, sweep_output::t_shared,
                   sweep_output::t_separate, sweep_output::time_ratio})
    {
        if (to_string(o) == s)
        {
            return o;
        }
    }
    return std::nullopt;
}

struct sweep_spec
{
    system_config base_config;
    sweep_parameter parameter = sweep_parameter::memory_window;
    std::vector<double> grid;
    std::vector<sweep_output> outputs;
};

struct sweep_row
{
    double value = 0.0;
    std::vector<double> cells;
    /// in_probability_domain of rci_shared / rci_separate at this row.
    bool shared_in_domain = true;
    bool separate_in_domain = true;
};

struct sweep_table
{
    sweep_parameter parameter = sweep_parameter::memory_window;
    std::vector<sweep_output> columns;
    std::vector<sweep_row> rows;

    std::optional<std::size_t> column_index(std::string_view name) const
    {
        for (std::size_t c = 0; c < columns.size(); ++c)
        {
            if (to_string(columns[c]) == name)
            {
                return c;
            }
        }
        return std::nullopt;
    }

    std::vector<double> column(std::string_view name) const
    {
        const auto c = column_index(name);
        if (!c)
        {
            throw config_error("unknown column '" + std::string(name) + "'");
        }
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows)
        {
            out.push_back(r.cells[*c]);
        }
        return out;
    }
};

/// Evenly spaced grid start, start + step, ..., stop. A last point within
/// 1e-9 steps of `stop` is snapped to it.
inline std::vector<double> make_grid(double start, double stop, double step)
{
    if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
    {
        throw config_error("grid bounds must be finite");
    }
    if (!(step > 0.0))
    {
        throw config_error("grid step must be positive");
    }
    if (stop < start)
    {
        return {};
    }
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t k = 0; k < count; ++k)
    {
        grid[k] = start + static_cast<double>(k) * step;
    }
    if (std::abs(grid.back() - stop) <= 1e-9 * step)
    {
        grid.back() = stop;
    }
    return grid;
}

/// `base` with the swept parameter set to `value`.
///
/// memory_window sets the shared window and every separate window.
/// noise_ratio repartitions each topic at fixed lambda_total.
/// rho sets every off-diagonal correlation.
inline system_config apply_sweep_value(const system_config& base, sweep_parameter parameter, double value)
{
    switch (parameter)
    {
    case sweep_parameter::memory_window:
        return base.with_memory(memory_config::uniform(value, base.n_topics()));
    case sweep_parameter::noise_ratio:
    {
        std::vector<topic_rates> topics;
        topics.reserve(base.n_topics());
        for (const auto& t : base.topics())
        {
            topics.push_back(topic_rates::from_noise_ratio(t.total(), value));
        }
        return base.with_topics(std::move(topics));
    }
    case sweep_parameter::n_agents:
    {
        if (!(value >= 0.0) || value != std::floor(value) || value > 4294967295.0)
        {
            throw config_error("n_agents grid values must be nonnegative integers");
        }
        const auto& l = base.latency();
        return base.with_latency(latency_params(l.alpha(), l.beta(), static_cast<unsigned>(value)));
    }
    case sweep_parameter::rho:
        return base.with_correlations(correlation_matrix::uniform(base.n_topics(), value));
    }
    return base;
}

/// Arguments of the symmetric two-topic forms, read off a configuration that
/// satisfies the symmetric specialisation.
struct symmetric_arguments
{
    double lambda_total;
    double noise_ratio;
    double window;
    double rho;
};

inline symmetric_arguments symmetric_arguments_of(const system_config& config)
{
    const auto& c = config;
    const bool ok = c.n_topics() == 2 && c.topic(0) == c.topic(1) && c.correlations().is_symmetric()
                    && c.memory().separate_windows()[0] == c.memory().shared_window()
                    && c.memory().separate_windows()[1] == c.memory().shared_window();
    if (!ok)
    {
        throw config_error("simplified forms need two topics with equal rates, symmetric correlations and "
                           "equal windows");
    }
    return {c.topic(0).total(), c.topic(0).noise_ratio(), c.memory().shared_window(), c.correlations()(0, 1)};
}

namespace detail {

inline std::string grid_label(sweep_parameter p, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(to_string(p)) + " = " + buf;
}

inline sweep_row evaluate_row(const sweep_spec& spec, double value)
{
    const auto config = apply_sweep_value(spec.base_config, spec.parameter, value);
    const auto shared = rci_shared(config);
    const auto separate = rci_separate(config);
    const auto& latency = config.latency();
    const double m_shared = config.memory().shared_window();
    const double m_separate = config.memory().max_separate_window();

    sweep_row row;
    row.value = value;
    row.shared_in_domain = shared.in_probability_domain;
    row.separate_in_domain = separate.in_probability_domain;
    row.cells.reserve(spec.outputs.size());
    for (auto out : spec.outputs)
    {
        switch (out)
        {
        case sweep_output::rci_shared: row.cells.push_back(shared.value); break;
        case sweep_output::rci_separate: row.cells.push_back(separate.value); break;
        case sweep_output::rci_ratio:
            if (shared.value == 0.0)
            {
                throw zero_denominator_error("rci_ratio: shared-context RCI is zero");
            }
            row.cells.push_back(separate.value / shared.value);
            break;
        case sweep_output::simplified_shared:
        {
            const auto a = symmetric_arguments_of(config);
            row.cells.push_back(simplified_rci_shared(a.lambda_total, a.noise_ratio, a.window, a.rho));
            break;
        }
        case sweep_output::simplified_separate:
        {
            const auto a = symmetric_arguments_of(config);
            row.cells.push_back(simplified_rci_separate(a.lambda_total, a.noise_ratio, a.window, a.rho));
            break;
        }
        case sweep_output::t_shared: row.cells.push_back(t_shared(latency, m_shared)); break;
        case sweep_output::t_separate: row.cells.push_back(t_separate(latency, m_separate)); break;
        case sweep_output::time_ratio:
            row.cells.push_back(response_time_ratio(latency, m_shared, m_separate));
            break;
        }
    }
    return row;
}

} // namespace detail

inline void check_sweep_spec(const sweep_spec& spec)
{
    if (spec.grid.empty())
    {
        throw config_error("empty grid");
    }
    for (std::size_t k = 0; k < spec.grid.size(); ++k)
    {
        if (!std::isfinite(spec.grid[k]))
        {
            throw config_error("grid values must be finite");
        }
        if (k > 0 && !(spec.grid[k] > spec.grid[k - 1]))
        {
            throw config_error("grid must be strictly increasing");
        }
    }
    if (spec.outputs.empty())
    {
        throw config_error("sweep needs at least one output");
    }
    const double lo = spec.grid.front();
    const double hi = spec.grid.back();
    switch (spec.parameter)
    {
    case sweep_parameter::memory_window:
        if (lo < 0.0)
        {
            throw config_error("memory_window grid values must be nonnegative");
        }
        break;
    case sweep_parameter::noise_ratio:
    case sweep_parameter::rho:
        if (lo < 0.0 || hi > 1.0)
        {
            throw config_error(std::string(to_string(spec.parameter)) + " grid values must lie in [0, 1]");
        }
        break;
    case sweep_parameter::n_agents:
        break;
    }
}

/// Evaluates the requested outputs at every grid point, in grid order.
/// Model errors are rethrown with the offending grid value in the message.
inline sweep_table run_sweep(const sweep_spec& spec)
{
    check_sweep_spec(spec);

    sweep_table table;
    table.parameter = spec.parameter;
    table.columns = spec.outputs;
    table.rows.reserve(spec.grid.size());
    for (double v : spec.grid)
    {
        try
        {
            table.rows.push_back(detail::evaluate_row(spec, v));
        }
        catch (const zero_denominator_error& e)
        {
            throw zero_denominator_error(std::string(e.what()) + " at " + detail::grid_label(spec.parameter, v));
        }
        catch (const math_domain_error& e)
        {
            throw math_domain_error(std::string(e.what()) + " at " + detail::grid_label(spec.parameter, v));
        }
        catch (const config_error& e)
        {
            throw config_error(std::string(e.what()) + " at " + detail::grid_label(spec.parameter, v));
        }
    }
    return table;
}

enum class column_shape
{
    nondecreasing,
    nonincreasing,
    bounded_01
};

struct shape_result
{
    bool ok = true;
    /// Row index of the first violation (the later row of a failing pair).
    std::optional<std::size_t> first_violation;

    explicit operator bool() const noexcept { return ok; }
};

inline constexpr double shape_tie_tolerance = 1e-12;

inline shape_result check_shape(const sweep_table& table, std::string_view column, column_shape shape)
{
    const auto values = table.column(column);
    for (std::size_t k = 0; k < values.size(); ++k)
    {
        bool bad = false;
        switch (shape)
        {
        case column_shape::bounded_01: bad = !(values[k] >= 0.0 && values[k] <= 1.0); break;
        case column_shape::nondecreasing: bad = k > 0 && values[k] < values[k - 1] - shape_tie_tolerance; break;
        case column_shape::nonincreasing: bad = k > 0 && values[k] > values[k - 1] + shape_tie_tolerance; break;
        }
        if (bad)
        {
            return {false, k};
        }
    }
    return {};
}

struct grid_interval
{
    double lower;
    double upper;
    friend bool operator==(const grid_interval&, const grid_interval&) = default;
};

/// First grid interval across which sign(col_a - col_b) flips. Rows where
/// the columns are exactly equal carry no sign and are skipped.
inline std::optional<grid_interval> crossover_scan(const sweep_table& table, std::string_view col_a,
                                                   std::string_view col_b)
{
    const auto a = table.column(col_a);
    const auto b = table.column(col_b);
    std::optional<std::size_t> last;
    int last_sign = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
    {
        const double d = a[k] - b[k];
        const int sign = (d > 0.0) - (d < 0.0);
        if (sign == 0)
        {
            continue;
        }
        if (last && sign != last_sign)
        {
            return grid_interval{table.rows[*last].value, table.rows[k].value};
        }
        last = k;
        last_sign = sign;
    }
    return std::nullopt;
}

} // namespace ctxcalc
