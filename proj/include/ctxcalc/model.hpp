#pragma once

/// \file ctxcalc/model.hpp
///
/// Closed-form consistency and latency model for shared-context versus
/// separate-context multi-agent configurations.
///
/// Statement generation per topic is a Poisson process split into correct
/// and noisy arrivals. A memory window M retains history for M time units
/// (rate times duration is dimensionless). The shared configuration pools
/// all topics into one window; the separate configuration gives every topic
/// its own window and couples topics through a correlation matrix.
///
/// Every function here is pure and safe to call concurrently.

#include <ctxcalc/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ctxcalc {

namespace detail {

inline void require_finite(double v, std::string_view what)
{
    if (!std::isfinite(v))
    {
        throw config_error(std::string(what) + " must be finite");
    }
}

inline double exp_decay(double rate, double window)
{
    return std::exp(-rate * window);
}

} // namespace detail

enum class context_mode
{
    shared,
    separate
};

inline std::string_view to_string(context_mode mode)
{
    return mode == context_mode::shared ? "shared" : "separate";
}

/// Correct and noisy statement rates of one topic.
class topic_rates
{
public:
    topic_rates(double lambda_correct, double lambda_noise)
        : correct_(lambda_correct)
        , noise_(lambda_noise)
    {
        detail::require_finite(lambda_correct, "lambda_correct");
        detail::require_finite(lambda_noise, "lambda_noise");
        if (lambda_correct < 0.0 || lambda_noise < 0.0)
        {
            throw config_error("topic rates must be nonnegative");
        }
        if (lambda_correct + lambda_noise <= 0.0)
        {
            throw config_error("topic total rate must be positive");
        }
    }

    double lambda_correct() const noexcept { return correct_; }
    double lambda_noise() const noexcept { return noise_; }
    double total() const noexcept { return correct_ + noise_; }
    double noise_ratio() const noexcept { return noise_ / total(); }

    /// Same total rate with a fraction `ratio` of it noisy.
    static topic_rates from_noise_ratio(double lambda_total, double ratio)
    {
        if (!(ratio >= 0.0 && ratio <= 1.0))
        {
            throw config_error("noise ratio must lie in [0, 1]");
        }
        return topic_rates((1.0 - ratio) * lambda_total, ratio * lambda_total);
    }

    friend bool operator==(const topic_rates&, const topic_rates&) = default;

private:
    double correct_;
    double noise_;
};

/// Inter-topic coupling coefficients. The diagonal is fixed at zero and
/// symmetry is not required.
class correlation_matrix
{
public:
    explicit correlation_matrix(std::size_t n_topics)
        : n_(n_topics)
        , entries_(n_topics * n_topics, 0.0)
    {
        if (n_topics == 0)
        {
            throw config_error("correlation matrix needs at least one topic");
        }
    }

    /// Row-major entries, n_topics * n_topics of them.
    correlation_matrix(std::size_t n_topics, std::vector<double> row_major)
        : n_(n_topics)
        , entries_(std::move(row_major))
    {
        if (n_topics == 0)
        {
            throw config_error("correlation matrix needs at least one topic");
        }
        if (entries_.size() != n_ * n_)
        {
            throw config_error("correlation matrix has " + std::to_string(entries_.size())
                               + " entries, expected " + std::to_string(n_ * n_));
        }
        for (std::size_t i = 0; i < n_; ++i)
        {
            for (std::size_t j = 0; j < n_; ++j)
            {
                const double v = entries_[i * n_ + j];
                detail::require_finite(v, "correlation entry");
                if (v < 0.0 || v > 1.0)
                {
                    throw config_error("correlation entry (" + std::to_string(i) + ","
                                       + std::to_string(j) + ") outside [0, 1]");
                }
                if (i == j && v != 0.0)
                {
                    throw config_error("correlation diagonal entry " + std::to_string(i)
                                       + " must be 0");
                }
            }
        }
    }

    /// Every off-diagonal entry equal to `rho`.
    static correlation_matrix uniform(std::size_t n_topics, double rho)
    {
        std::vector<double> v(n_topics * n_topics, rho);
        for (std::size_t i = 0; i < n_topics; ++i)
        {
            v[i * n_topics + i] = 0.0;
        }
        return correlation_matrix(n_topics, std::move(v));
    }

    std::size_t n_topics() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_.at(i * n_ + j); }
    std::span<const double> row_major() const noexcept { return entries_; }

    bool is_symmetric() const noexcept
    {
        for (std::size_t i = 0; i < n_; ++i)
        {
            for (std::size_t j = i + 1; j < n_; ++j)
            {
                if (entries_[i * n_ + j] != entries_[j * n_ + i])
                {
                    return false;
                }
            }
        }
        return true;
    }

    friend bool operator==(const correlation_matrix&, const correlation_matrix&) = default;

private:
    std::size_t n_;
    std::vector<double> entries_;
};

/// Shared window M and per-topic separate windows M_i.
class memory_config
{
public:
    memory_config(double shared_window, std::vector<double> separate_windows)
        : shared_(shared_window)
        , separate_(std::move(separate_windows))
    {
        detail::require_finite(shared_window, "shared_window");
        if (shared_window < 0.0)
        {
            throw config_error("shared_window must be nonnegative");
        }
        for (double w : separate_)
        {
            detail::require_finite(w, "separate window");
            if (w < 0.0)
            {
                throw config_error("separate windows must be nonnegative");
            }
        }
    }

    /// Every separate window defaults to the shared one.
    static memory_config uniform(double window, std::size_t n_topics)
    {
        return memory_config(window, std::vector<double>(n_topics, window));
    }

    double shared_window() const noexcept { return shared_; }
    std::span<const double> separate_windows() const noexcept { return separate_; }

    double max_separate_window() const noexcept
    {
        double m = 0.0;
        for (double w : separate_)
        {
            m = std::max(m, w);
        }
        return m;
    }

    friend bool operator==(const memory_config&, const memory_config&) = default;

private:
    double shared_;
    std::vector<double> separate_;
};

/// Search-time scale alpha, per-query cost beta and number of agents queried.
class latency_params
{
public:
    latency_params(double alpha, double beta, unsigned n_agents)
        : alpha_(alpha)
        , beta_(beta)
        , n_agents_(n_agents)
    {
        detail::require_finite(alpha, "alpha");
        detail::require_finite(beta, "beta");
        if (alpha <= 0.0)
        {
            throw config_error("alpha must be positive");
        }
        if (beta < 0.0)
        {
            throw config_error("beta must be nonnegative");
        }
    }

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    unsigned n_agents() const noexcept { return n_agents_; }

    friend bool operator==(const latency_params&, const latency_params&) = default;

private:
    double alpha_;
    double beta_;
    unsigned n_agents_;
};

class system_config
{
public:
    system_config(std::vector<topic_rates> topics,
                  correlation_matrix correlations,
                  memory_config memory,
                  latency_params latency)
        : topics_(std::move(topics))
        , correlations_(std::move(correlations))
        , memory_(std::move(memory))
        , latency_(latency)
    {
        if (topics_.empty())
        {
            throw config_error("at least one topic is required");
        }
        if (correlations_.n_topics() != topics_.size())
        {
            throw config_error("correlation matrix is " + std::to_string(correlations_.n_topics())
                               + "x" + std::to_string(correlations_.n_topics()) + " but there are "
                               + std::to_string(topics_.size()) + " topics");
        }
        if (memory_.separate_windows().size() != topics_.size())
        {
            throw config_error("separate_windows has " + std::to_string(memory_.separate_windows().size())
                               + " entries but there are " + std::to_string(topics_.size()) + " topics");
        }
    }

    std::size_t n_topics() const noexcept { return topics_.size(); }
    std::span<const topic_rates> topics() const noexcept { return topics_; }
    const topic_rates& topic(std::size_t i) const { return topics_.at(i); }
    const correlation_matrix& correlations() const noexcept { return correlations_; }
    const memory_config& memory() const noexcept { return memory_; }
    const latency_params& latency() const noexcept { return latency_; }

    /// Lambda = sum of per-topic total rates.
    double pooled_rate() const noexcept
    {
        double sum = 0.0;
        for (const auto& t : topics_)
        {
            sum += t.total();
        }
        return sum;
    }

    system_config with_topics(std::vector<topic_rates> topics) const
    {
        return system_config(std::move(topics), correlations_, memory_, latency_);
    }
    system_config with_correlations(correlation_matrix c) const
    {
        return system_config(topics_, std::move(c), memory_, latency_);
    }
    system_config with_memory(memory_config m) const
    {
        return system_config(topics_, correlations_, std::move(m), latency_);
    }
    system_config with_latency(latency_params l) const
    {
        return system_config(topics_, correlations_, memory_, l);
    }

    friend bool operator==(const system_config&, const system_config&) = default;

private:
    std::vector<topic_rates> topics_;
    correlation_matrix correlations_;
    memory_config memory_;
    latency_params latency_;
};

/// RCI value with its components. `value` is never clamped.
struct rci_report
{
    double value = 0.0;
    /// 1 - e^(-Lambda M) for shared; product of per-topic factors for separate.
    double retention_factor = 0.0;
    double noise_impact_total = 0.0;
    std::vector<double> noise_impacts;
    bool in_probability_domain = false;
};

//
// Rates and probabilities
//

inline double total_rate(const topic_rates& rates) noexcept
{
    return rates.lambda_correct() + rates.lambda_noise();
}

/// e^(-lambda M): probability that no statement arrives within the window.
inline double retention_probability(double lambda_total, double window)
{
    if (!(lambda_total > 0.0))
    {
        throw math_domain_error("retention_probability: rate must be positive");
    }
    if (!(window >= 0.0))
    {
        throw math_domain_error("retention_probability: window must be nonnegative");
    }
    return detail::exp_decay(lambda_total, window);
}

/// e^(-lambda_total M) * lambda_noise / lambda_total, with the noise share
/// taken against `lambda_total`.
inline double noise_after_correct(double lambda_total, double lambda_noise, double window)
{
    return retention_probability(lambda_total, window) * (lambda_noise / lambda_total);
}

inline double noise_after_correct(const topic_rates& rates, double window)
{
    return noise_after_correct(rates.total(), rates.lambda_noise(), window);
}

namespace detail {

/// Per-topic noise-after-correct terms under the mode's rate/window
/// substitution: pooled Lambda and shared M, or lambda_i and M_i.
inline std::vector<double> noise_after_correct_terms(const system_config& config, context_mode mode)
{
    std::vector<double> terms(config.n_topics());
    if (mode == context_mode::shared)
    {
        const double pooled = config.pooled_rate();
        const double window = config.memory().shared_window();
        for (std::size_t j = 0; j < terms.size(); ++j)
        {
            terms[j] = noise_after_correct(pooled, config.topic(j).lambda_noise(), window);
        }
    }
    else
    {
        for (std::size_t j = 0; j < terms.size(); ++j)
        {
            terms[j] = noise_after_correct(config.topic(j), config.memory().separate_windows()[j]);
        }
    }
    return terms;
}

inline double coupled_impact(const correlation_matrix& rho, std::span<const double> terms, std::size_t i)
{
    double impact = terms[i];
    for (std::size_t j = 0; j < terms.size(); ++j)
    {
        if (j != i)
        {
            impact += rho(i, j) * terms[j];
        }
    }
    return impact;
}

inline bool in_unit_interval(double v) noexcept
{
    return v >= 0.0 && v <= 1.0;
}

} // namespace detail

/// P(noise after correct)_i + sum_{j != i} rho_ij P(noise after correct)_j.
inline double noise_impact(const system_config& config, std::size_t topic_index, context_mode mode)
{
    if (topic_index >= config.n_topics())
    {
        throw std::out_of_range("noise_impact: topic index " + std::to_string(topic_index)
                                + " out of range for " + std::to_string(config.n_topics()) + " topics");
    }
    const auto terms = detail::noise_after_correct_terms(config, mode);
    return detail::coupled_impact(config.correlations(), terms, topic_index);
}

//
// Response consistency index
//

inline rci_report rci_shared(const system_config& config)
{
    const auto terms = detail::noise_after_correct_terms(config, context_mode::shared);

    rci_report r;
    r.noise_impacts.resize(config.n_topics());
    for (std::size_t i = 0; i < config.n_topics(); ++i)
    {
        r.noise_impacts[i] = detail::coupled_impact(config.correlations(), terms, i);
        r.noise_impact_total += r.noise_impacts[i];
    }
    r.retention_factor = 1.0 - retention_probability(config.pooled_rate(), config.memory().shared_window());
    const double bracket = 1.0 - r.noise_impact_total;
    r.value = r.retention_factor * bracket;

    r.in_probability_domain = bracket >= 0.0 && detail::in_unit_interval(r.value);
    for (double t : r.noise_impacts)
    {
        r.in_probability_domain = r.in_probability_domain && detail::in_unit_interval(t);
    }
    return r;
}

inline rci_report rci_separate(const system_config& config)
{
    const auto terms = detail::noise_after_correct_terms(config, context_mode::separate);
    const auto windows = config.memory().separate_windows();

    rci_report r;
    r.value = 1.0;
    r.retention_factor = 1.0;
    r.in_probability_domain = true;
    r.noise_impacts.resize(config.n_topics());
    for (std::size_t i = 0; i < config.n_topics(); ++i)
    {
        const double retained = 1.0 - retention_probability(config.topic(i).total(), windows[i]);
        const double impact = detail::coupled_impact(config.correlations(), terms, i);
        r.noise_impacts[i] = impact;
        r.noise_impact_total += impact;
        r.retention_factor *= retained;
        r.value *= retained * (1.0 - impact);
        r.in_probability_domain = r.in_probability_domain && detail::in_unit_interval(impact);
    }
    r.in_probability_domain = r.in_probability_domain && detail::in_unit_interval(r.value);
    return r;
}

inline double rci_ratio(const system_config& config)
{
    const double shared = rci_shared(config).value;
    if (shared == 0.0)
    {
        throw zero_denominator_error("rci_ratio: shared-context RCI is zero");
    }
    return rci_separate(config).value / shared;
}

//
// Response time
//

/// alpha * ln(1 + M).
inline double t_shared(const latency_params& latency, double window)
{
    if (!(window >= 0.0))
    {
        throw math_domain_error("t_shared: window must be nonnegative");
    }
    return latency.alpha() * std::log1p(window);
}

/// alpha * ln(1 + M_separate) + beta * N.
inline double t_separate(const latency_params& latency, double separate_window)
{
    if (!(separate_window >= 0.0))
    {
        throw math_domain_error("t_separate: window must be nonnegative");
    }
    return latency.alpha() * std::log1p(separate_window) + latency.beta() * latency.n_agents();
}

inline double response_time_ratio(const latency_params& latency, double shared_window, double separate_window)
{
    const double denom = t_shared(latency, shared_window);
    const double numer = t_separate(latency, separate_window);
    if (denom == 0.0)
    {
        throw zero_denominator_error("response_time_ratio: shared search time is zero (shared_window = 0)");
    }
    return numer / denom;
}

//
// Symmetric two-topic forms, exactly as printed. The shared form carries a
// (1 + rho/2) cross coefficient where specialising rci_shared gives (1 + rho),
// so the two differ by e^(-2 lambda M) (rho/2) r (1 - e^(-2 lambda M)).
//

namespace detail {

inline void check_simplified_args(double lambda_total, double noise_ratio, double window, double rho)
{
    if (!(lambda_total > 0.0) || !std::isfinite(lambda_total))
    {
        throw math_domain_error("simplified RCI: lambda_total must be positive");
    }
    if (!in_unit_interval(noise_ratio))
    {
        throw math_domain_error("simplified RCI: noise_ratio must lie in [0, 1]");
    }
    if (!(window >= 0.0) || !std::isfinite(window))
    {
        throw math_domain_error("simplified RCI: window must be nonnegative");
    }
    if (!in_unit_interval(rho))
    {
        throw math_domain_error("simplified RCI: rho must lie in [0, 1]");
    }
}

} // namespace detail

inline double simplified_rci_shared(double lambda_total, double noise_ratio, double window, double rho)
{
    detail::check_simplified_args(lambda_total, noise_ratio, window, rho);
    const double q2 = detail::exp_decay(2.0 * lambda_total, window);
    return (1.0 - q2) * (1.0 - q2 * (1.0 + rho / 2.0) * noise_ratio);
}

inline double simplified_rci_separate(double lambda_total, double noise_ratio, double window, double rho)
{
    detail::check_simplified_args(lambda_total, noise_ratio, window, rho);
    const double q = detail::exp_decay(lambda_total, window);
    const double retained = 1.0 - q;
    const double bracket = 1.0 - (q + rho * q) * noise_ratio;
    return retained * retained * bracket * bracket;
}

inline double simplified_rci_ratio(double lambda_total, double noise_ratio, double window, double rho)
{
    const double shared = simplified_rci_shared(lambda_total, noise_ratio, window, rho);
    if (shared == 0.0)
    {
        throw zero_denominator_error("simplified_rci_ratio: simplified shared RCI is zero");
    }
    return simplified_rci_separate(lambda_total, noise_ratio, window, rho) / shared;
}

/// Symmetric two-topic configuration: equal total rate, equal noise ratio,
/// one window for every context and rho on both off-diagonals.
inline system_config symmetric_two_topic(double lambda_total, double noise_ratio, double window, double rho,
                                         latency_params latency = latency_params(1.0, 0.0, 0))
{
    const auto rates = topic_rates::from_noise_ratio(lambda_total, noise_ratio);
    return system_config({rates, rates}, correlation_matrix::uniform(2, rho), memory_config::uniform(window, 2),
                         latency);
}

} // namespace ctxcalc
