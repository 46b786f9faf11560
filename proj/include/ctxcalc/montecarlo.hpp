#pragma once

/// \file ctxcalc/montecarlo.hpp
///
/// Seeded Monte Carlo estimators for every probabilistic component of the
/// closed-form model, plus a validator that scores each closed form against
/// its estimate.
///
/// Cross-topic correlation terms are algebraic weights, not a sampled joint
/// process: RCI estimates sample the per-topic probabilities on independent
/// streams and push them through the exact RCI algebra.

#include <ctxcalc/errors.hpp>
#include <ctxcalc/model.hpp>
#include <ctxcalc/rng.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace ctxcalc {

struct sim_estimate
{
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
    rng_spec seed;
};

/// Trial layout. Partition p of P runs on stream `rng.child(p)`; results
/// depend on the partition count but not on thread scheduling.
struct sim_options
{
    std::uint64_t trials = 1'000'000;
    unsigned partitions = 1;
};

/// Inverse-CDF exponential: -ln(u) / rate for u in (0, 1].
inline double exponential_from_uniform(double rate, double u)
{
    if (!(rate > 0.0))
    {
        throw math_domain_error("exponential sample: rate must be positive");
    }
    if (!(u > 0.0 && u <= 1.0))
    {
        throw math_domain_error("exponential sample: uniform variate must lie in (0, 1]");
    }
    return -std::log(u) / rate;
}

inline double sample_interarrival(double rate, random_stream& stream)
{
    return exponential_from_uniform(rate, stream.uniform_open0());
}

namespace detail {

inline void check_sim_options(const sim_options& opts)
{
    if (opts.trials < 1)
    {
        throw config_error("trials must be at least 1");
    }
    if (opts.partitions < 1)
    {
        throw config_error("partitions must be at least 1");
    }
    if (opts.partitions > opts.trials)
    {
        throw config_error("partitions must not exceed trials");
    }
}

/// Counts successes of `trial(stream)` over opts.trials trials split across
/// opts.partitions worker threads.
template <typename Trial>
sim_estimate run_bernoulli(const sim_options& opts, rng_spec rng, Trial trial)
{
    check_sim_options(opts);

    const std::uint64_t parts = opts.partitions;
    std::vector<std::uint64_t> hits(parts, 0);
    auto work = [&](std::uint64_t p) {
        const std::uint64_t n = opts.trials / parts + (p < opts.trials % parts ? 1 : 0);
        random_stream stream(rng.child(p));
        std::uint64_t count = 0;
        for (std::uint64_t t = 0; t < n; ++t)
        {
            count += trial(stream) ? 1 : 0;
        }
        hits[p] = count;
    };

    if (parts == 1)
    {
        work(0);
    }
    else
    {
        std::vector<std::jthread> workers;
        workers.reserve(parts);
        for (std::uint64_t p = 0; p < parts; ++p)
        {
            workers.emplace_back(work, p);
        }
    }

    std::uint64_t total = 0;
    for (auto h : hits)
    {
        total += h;
    }
    sim_estimate est;
    est.trials = opts.trials;
    est.seed = rng;
    est.mean = static_cast<double>(total) / static_cast<double>(opts.trials);
    est.std_error = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(opts.trials));
    return est;
}

} // namespace detail

/// Fraction of trials with no arrival inside [0, window); estimates e^(-rate window).
inline sim_estimate estimate_zero_arrival(double rate, double window, const sim_options& opts, rng_spec rng)
{
    if (!(rate > 0.0))
    {
        throw math_domain_error("estimate_zero_arrival: rate must be positive");
    }
    if (!(window >= 0.0))
    {
        throw math_domain_error("estimate_zero_arrival: window must be nonnegative");
    }
    return detail::run_bernoulli(opts, rng, [rate, window](random_stream& s) {
        return !(sample_interarrival(rate, s) < window);
    });
}

/// Competing exponentials at lambda_correct and lambda_noise; success when the
/// noisy arrival comes first. Estimates lambda_noise / lambda_total.
inline sim_estimate estimate_next_event_noise(const topic_rates& rates, const sim_options& opts, rng_spec rng)
{
    constexpr double never = std::numeric_limits<double>::infinity();
    const double lc = rates.lambda_correct();
    const double ln = rates.lambda_noise();
    return detail::run_bernoulli(opts, rng, [lc, ln](random_stream& s) {
        const double correct = lc > 0.0 ? sample_interarrival(lc, s) : never;
        const double noise = ln > 0.0 ? sample_interarrival(ln, s) : never;
        return noise < correct;
    });
}

/// Joint event on the merged stream at lambda_total: the window holds no
/// arrival and the first arrival after it is thinned as noisy. Estimates
/// e^(-lambda_total window) * lambda_noise / lambda_total.
inline sim_estimate estimate_noise_after_correct(const topic_rates& rates,
                                                 double window,
                                                 const sim_options& opts,
                                                 rng_spec rng)
{
    if (!(window >= 0.0))
    {
        throw math_domain_error("estimate_noise_after_correct: window must be nonnegative");
    }
    const double total = rates.total();
    const double p_noise = rates.lambda_noise() / total;
    return detail::run_bernoulli(opts, rng, [total, p_noise, window](random_stream& s) {
        const double first = sample_interarrival(total, s);
        if (first < window)
        {
            return false;
        }
        return s.uniform_open0() <= p_noise;
    });
}

/// Component estimates behind one RCI estimate.
struct rci_components
{
    context_mode mode = context_mode::shared;
    /// One zero-arrival estimate (shared) or one per topic (separate).
    std::vector<sim_estimate> zero_arrival;
    std::vector<double> zero_arrival_analytic;
    /// Per-topic noise-after-correct under the mode's substitution.
    std::vector<sim_estimate> noise_after_correct;
    std::vector<double> noise_after_correct_analytic;
    sim_estimate composed;
};

namespace detail {

/// Rates whose merged-stream noise-after-correct event has the probability
/// of topic j's term under `mode`.
inline topic_rates component_rates(const system_config& config, std::size_t j, context_mode mode)
{
    if (mode == context_mode::separate)
    {
        return config.topic(j);
    }
    const double pooled = config.pooled_rate();
    const double noise = config.topic(j).lambda_noise();
    return topic_rates(pooled - noise, noise);
}

inline double component_window(const system_config& config, std::size_t j, context_mode mode)
{
    return mode == context_mode::shared ? config.memory().shared_window() : config.memory().separate_windows()[j];
}

/// RCI value and its first-order gradient with respect to the zero-arrival
/// probabilities q and the noise-after-correct terms a.
struct rci_linearisation
{
    double value = 0.0;
    std::vector<double> d_q;
    std::vector<double> d_a;
};

inline rci_linearisation linearise_rci(const correlation_matrix& rho,
                                       context_mode mode,
                                       std::span<const double> q,
                                       std::span<const double> a)
{
    const std::size_t n = a.size();
    rci_linearisation lin;
    lin.d_a.assign(n, 0.0);

    // d impact_i / d a_j: 1 on the diagonal, rho_ij elsewhere.
    auto coupling = [&rho](std::size_t i, std::size_t j) { return i == j ? 1.0 : rho(i, j); };

    if (mode == context_mode::shared)
    {
        double impact_total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            impact_total += coupled_impact(rho, a, i);
        }
        const double retained = 1.0 - q[0];
        const double bracket = 1.0 - impact_total;
        lin.value = retained * bracket;
        lin.d_q = {-bracket};
        for (std::size_t j = 0; j < n; ++j)
        {
            double column = 0.0;
            for (std::size_t i = 0; i < n; ++i)
            {
                column += coupling(i, j);
            }
            lin.d_a[j] = -retained * column;
        }
        return lin;
    }

    std::vector<double> retained(n), bracket(n), factor(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        retained[i] = 1.0 - q[i];
        bracket[i] = 1.0 - coupled_impact(rho, a, i);
        factor[i] = retained[i] * bracket[i];
    }
    auto others = [&factor, n](std::size_t skip) {
        double prod = 1.0;
        for (std::size_t k = 0; k < n; ++k)
        {
            if (k != skip)
            {
                prod *= factor[k];
            }
        }
        return prod;
    };

    lin.value = 1.0;
    for (double f : factor)
    {
        lin.value *= f;
    }
    lin.d_q.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const double rest = others(i);
        lin.d_q[i] = -bracket[i] * rest;
        for (std::size_t j = 0; j < n; ++j)
        {
            lin.d_a[j] -= retained[i] * coupling(i, j) * rest;
        }
    }
    return lin;
}

} // namespace detail

/// Estimates every RCI component on its own stream (rng.child(k)) and
/// composes them with the exact RCI algebra. The composed std_error is a
/// first-order delta-method approximation.
inline rci_components estimate_rci_components(const system_config& config,
                                              context_mode mode,
                                              const sim_options& opts,
                                              rng_spec rng)
{
    const std::size_t n = config.n_topics();
    std::uint64_t next_stream = 0;

    rci_components out;
    out.mode = mode;
    if (mode == context_mode::shared)
    {
        const double pooled = config.pooled_rate();
        const double window = config.memory().shared_window();
        out.zero_arrival.push_back(estimate_zero_arrival(pooled, window, opts, rng.child(next_stream++)));
        out.zero_arrival_analytic.push_back(retention_probability(pooled, window));
    }
    else
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            const double rate = config.topic(i).total();
            const double window = config.memory().separate_windows()[i];
            out.zero_arrival.push_back(estimate_zero_arrival(rate, window, opts, rng.child(next_stream++)));
            out.zero_arrival_analytic.push_back(retention_probability(rate, window));
        }
    }
    for (std::size_t j = 0; j < n; ++j)
    {
        const auto rates = detail::component_rates(config, j, mode);
        const double window = detail::component_window(config, j, mode);
        out.noise_after_correct.push_back(
            estimate_noise_after_correct(rates, window, opts, rng.child(next_stream++)));
        out.noise_after_correct_analytic.push_back(noise_after_correct(rates, window));
    }

    std::vector<double> q, a;
    for (const auto& e : out.zero_arrival)
    {
        q.push_back(e.mean);
    }
    for (const auto& e : out.noise_after_correct)
    {
        a.push_back(e.mean);
    }
    const auto lin = detail::linearise_rci(config.correlations(), mode, q, a);

    double variance = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k)
    {
        variance += lin.d_q[k] * lin.d_q[k] * out.zero_arrival[k].std_error * out.zero_arrival[k].std_error;
    }
    for (std::size_t k = 0; k < a.size(); ++k)
    {
        variance += lin.d_a[k] * lin.d_a[k] * out.noise_after_correct[k].std_error
                    * out.noise_after_correct[k].std_error;
    }
    out.composed.mean = lin.value;
    out.composed.std_error = std::sqrt(variance);
    out.composed.trials = opts.trials;
    out.composed.seed = rng;
    return out;
}

inline sim_estimate estimate_rci(const system_config& config, context_mode mode, const sim_options& opts, rng_spec rng)
{
    return estimate_rci_components(config, mode, opts, rng).composed;
}

//
// Validation
//

struct validation_record
{
    std::string component;
    double analytic = 0.0;
    sim_estimate estimate;
    double z_score = 0.0;
    bool passed = false;
};

struct validation_report
{
    std::vector<validation_record> records;
    std::uint64_t trials = 0;
    unsigned partitions = 1;
    double sigma_threshold = 4.0;
    rng_spec seed;

    bool all_passed() const noexcept
    {
        for (const auto& r : records)
        {
            if (!r.passed)
            {
                return false;
            }
        }
        return true;
    }
};

struct validate_options
{
    std::uint64_t trials = 1'000'000;
    unsigned partitions = 1;
    double sigma_threshold = 4.0;
    /// Test hook: shift this component's analytic value by
    /// `corrupt_offset_sigmas` standard errors before scoring.
    std::optional<std::string> corrupt_component;
    double corrupt_offset_sigmas = 10.0;
};

inline constexpr std::uint64_t min_validation_trials = 10'000;

/// (mean - analytic) / std_error. A zero std_error scores 0 on an exact
/// match and infinity otherwise.
inline double z_score(double mean, double analytic, double std_error)
{
    if (std_error > 0.0)
    {
        return (mean - analytic) / std_error;
    }
    if (mean == analytic)
    {
        return 0.0;
    }
    return mean > analytic ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

/// Runs every component estimator against its closed form. Component k is
/// sampled on stream rng.child(k), so the report is a pure function of
/// (config, options, rng).
inline validation_report validate(const system_config& config, const validate_options& vopts, rng_spec rng)
{
    if (vopts.trials < min_validation_trials)
    {
        throw config_error("validate: trials must be at least " + std::to_string(min_validation_trials));
    }
    if (!(vopts.sigma_threshold > 0.0))
    {
        throw config_error("validate: sigma_threshold must be positive");
    }

    const sim_options opts{vopts.trials, vopts.partitions};
    validation_report report;
    report.trials = vopts.trials;
    report.partitions = vopts.partitions;
    report.sigma_threshold = vopts.sigma_threshold;
    report.seed = rng;

    std::uint64_t next_stream = 0;
    auto score = [&](std::string name, double analytic, const sim_estimate& est) {
        if (vopts.corrupt_component && *vopts.corrupt_component == name)
        {
            analytic += vopts.corrupt_offset_sigmas * est.std_error;
        }
        validation_record rec;
        rec.component = std::move(name);
        rec.analytic = analytic;
        rec.estimate = est;
        rec.z_score = z_score(est.mean, analytic, est.std_error);
        rec.passed = std::abs(rec.z_score) <= vopts.sigma_threshold;
        report.records.push_back(std::move(rec));
    };

    for (std::size_t i = 0; i < config.n_topics(); ++i)
    {
        const auto& rates = config.topic(i);
        const double window = config.memory().separate_windows()[i];
        const auto idx = std::to_string(i);
        score("zero_arrival[separate," + idx + "]", retention_probability(rates.total(), window),
              estimate_zero_arrival(rates.total(), window, opts, rng.child(next_stream++)));
        score("next_event_noise[" + idx + "]", rates.lambda_noise() / rates.total(),
              estimate_next_event_noise(rates, opts, rng.child(next_stream++)));
        score("noise_after_correct[separate," + idx + "]", noise_after_correct(rates, window),
              estimate_noise_after_correct(rates, window, opts, rng.child(next_stream++)));
    }

    const double pooled = config.pooled_rate();
    const double shared_window = config.memory().shared_window();
    score("zero_arrival[shared]", retention_probability(pooled, shared_window),
          estimate_zero_arrival(pooled, shared_window, opts, rng.child(next_stream++)));
    for (std::size_t i = 0; i < config.n_topics(); ++i)
    {
        const auto rates = detail::component_rates(config, i, context_mode::shared);
        score("noise_after_correct[shared," + std::to_string(i) + "]", noise_after_correct(rates, shared_window),
              estimate_noise_after_correct(rates, shared_window, opts, rng.child(next_stream++)));
    }

    score("rci[shared]", rci_shared(config).value,
          estimate_rci(config, context_mode::shared, opts, rng.child(next_stream++)));
    score("rci[separate]", rci_separate(config).value,
          estimate_rci(config, context_mode::separate, opts, rng.child(next_stream++)));
    return report;
}

} // namespace ctxcalc
