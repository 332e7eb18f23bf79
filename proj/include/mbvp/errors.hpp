#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>

namespace mbvp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a map (e.g. a velocity on the light cone).
class DomainError : public Error {
public:
    using Error::Error;
};

class InvalidParams : public Error {
public:
    using Error::Error;
};

/// The requested computation is not available for this kind of input.
class Unsupported : public Error {
public:
    using Error::Error;
};

class NegativeEntry : public Error {
public:
    using Error::Error;
};

class NotConvergent : public Error {
public:
    using Error::Error;
};

/// Damped Newton failed to drive the residual below tolerance.
class NewtonDivergence : public Error {
public:
    NewtonDivergence(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// Every strategy of the nonlinear solver was exhausted.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

class NotCoercive : public Error {
public:
    using Error::Error;
};

/// Non-finite or undefined value while evaluating an expression or a nonlinearity.
class EvalError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset, std::set<std::string> expected)
        : Error(what), offset_(offset), expected_(std::move(expected)) {}
    std::size_t offset() const noexcept { return offset_; }
    const std::set<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::set<std::string> expected_;
};

/// Malformed or inconsistent problem configuration; `key()` names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& message)
        : Error(key + ": " + message), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace mbvp
