#pragma once

/// \file ctxcalc/rng.hpp
///
/// Counter-based random streams. Draw n of stream (seed, stream_id) is a pure
/// function of (seed, stream_id, n): integer-only arithmetic, so sequences are
/// identical on every platform and independent of thread scheduling.

#include <cstdint>
#include <limits>

namespace ctxcalc {

struct rng_spec
{
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    /// Child stream for sub-task `index` (partition, component, ...).
    rng_spec child(std::uint64_t index) const noexcept;

    friend bool operator==(const rng_spec&, const rng_spec&) = default;
};

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finaliser (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream_id) noexcept
{
    return mix64(seed + golden_gamma) ^ mix64(mix64(stream_id ^ 0xD1B54A32D192ED03ULL) + golden_gamma);
}

} // namespace detail

inline rng_spec rng_spec::child(std::uint64_t index) const noexcept
{
    return rng_spec{seed, detail::mix64(stream_id * detail::golden_gamma + index + 1)};
}

/// Sequential view of one counter-based stream.
class random_stream
{
public:
    using result_type = std::uint64_t;

    explicit random_stream(rng_spec spec) noexcept
        : key_(detail::stream_key(spec.seed, spec.stream_id))
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::golden_gamma);
    }

    /// Uniform on (0, 1] with 53-bit resolution; zero is never returned.
    double uniform_open0() noexcept
    {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace ctxcalc
