#pragma once

#include <stdexcept>
#include <string>

namespace ctxcalc {

/// Invalid construction input or malformed scenario (CLI exit 2).
class config_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Input outside a formula's mathematical domain (CLI exit 3).
class math_domain_error : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// A ratio whose denominator evaluates to zero. Reported instead of infinity.
class zero_denominator_error : public math_domain_error
{
public:
    using math_domain_error::math_domain_error;
};

/// Filesystem failure while writing results (CLI exit 4).
class io_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace ctxcalc
