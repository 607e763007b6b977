#pragma once

#include <stdexcept>
#include <string>

namespace longrun {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (tilt outside t_domain, v <= a, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A target mean is not attainable by m(t); for paths this signals a trajectory the
/// conditioning makes impossible.
class RangeError : public Error {
public:
    using Error::Error;
};

/// An iterative solver failed to converge. The last bracket is kept for diagnostics.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, double lo, double hi)
        : Error(what), bracket_lo(lo), bracket_hi(hi) {}
    double bracket_lo;
    double bracket_hi;
};

class IntegrationFailure : public Error {
public:
    IntegrationFailure(const std::string& what, double estimate, double error)
        : Error(what), estimate(estimate), error(error) {}
    double estimate;
    double error;
};

/// The acceptance-rejection bound p <= K f was observed to fail.
class EnvelopeViolation : public Error {
public:
    using Error::Error;
};

/// A path lies outside the support of an exact density.
class SupportError : public Error {
public:
    using Error::Error;
};

class GridTooCoarse : public Error {
public:
    GridTooCoarse(const std::string& what, double change) : Error(what), change(change) {}
    double change;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace longrun
