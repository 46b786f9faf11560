#pragma once

/// \file ctxcalc/format.hpp
///
/// Locale-independent serialisation of model results: CSV tables and JSON
/// documents. Decimal output uses 12 significant digits.

#include <ctxcalc/model.hpp>
#include <ctxcalc/montecarlo.hpp>
#include <ctxcalc/sweep.hpp>

#include <json.hpp>

#include <cstdio>
#include <string>

namespace ctxcalc {

using ordered_json = nlohmann::ordered_json;

/// %.12g in the C locale ("." decimal separator, no grouping).
inline std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Header `parameter,<outputs...>`, one row per grid point.
inline std::string to_csv(const sweep_table& table)
{
    std::string out(to_string(table.parameter));
    for (auto c : table.columns)
    {
        out += ',';
        out += to_string(c);
    }
    out += '\n';
    for (const auto& row : table.rows)
    {
        out += format_number(row.value);
        for (double cell : row.cells)
        {
            out += ',';
            out += format_number(cell);
        }
        out += '\n';
    }
    return out;
}

inline ordered_json to_json(const rci_report& r)
{
    ordered_json j;
    j["value"] = r.value;
    j["retention_factor"] = r.retention_factor;
    j["noise_impact_total"] = r.noise_impact_total;
    j["noise_impacts"] = r.noise_impacts;
    j["in_probability_domain"] = r.in_probability_domain;
    return j;
}

inline ordered_json to_json(const rng_spec& s)
{
    return ordered_json{{"seed", s.seed}, {"stream_id", s.stream_id}};
}

inline ordered_json to_json(const sim_estimate& e)
{
    ordered_json j;
    j["mean"] = e.mean;
    j["std_error"] = e.std_error;
    j["trials"] = e.trials;
    j["rng"] = to_json(e.seed);
    return j;
}

inline ordered_json to_json(const validation_report& report)
{
    ordered_json j;
    j["trials"] = report.trials;
    j["partitions"] = report.partitions;
    j["sigma_threshold"] = report.sigma_threshold;
    j["rng"] = to_json(report.seed);
    j["all_passed"] = report.all_passed();
    ordered_json records = ordered_json::array();
    for (const auto& r : report.records)
    {
        ordered_json rec;
        rec["component"] = r.component;
        rec["analytic"] = r.analytic;
        rec["estimate"] = to_json(r.estimate);
        // JSON has no infinity; an unbounded z-score is written as null.
        rec["z_score"] = std::isfinite(r.z_score) ? ordered_json(r.z_score) : ordered_json(nullptr);
        rec["passed"] = r.passed;
        records.push_back(std::move(rec));
    }
    j["components"] = std::move(records);
    return j;
}

} // namespace ctxcalc
