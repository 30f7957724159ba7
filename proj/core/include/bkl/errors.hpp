#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace bkl {

namespace detail {

/// Compact number for error messages.
inline std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (non-positive scale
/// factor, t == t0, non-positive scaling parameter, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// An exponent argument exceeded the configured guard, or exp() overflowed.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// A quantity is undefined at this point (vanishing denominators).
class IndeterminateError : public Error {
public:
    using Error::Error;
};

/// Initial condition violates the first integral beyond tolerance.
class IllPosedInitialCondition : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class FitFailure : public Error {
public:
    using Error::Error;
};

class LinearityCapExceeded : public Error {
public:
    using Error::Error;
};

/// Trajectory does not qualify for an apex analysis.
class NotApexApproaching : public Error {
public:
    using Error::Error;
};

}  // namespace bkl
