/// @file errors.hpp
/// @brief Exception types thrown by the ivobs library.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ivobs {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violated a documented precondition (non-finite value, bad ordering, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Both branches of a gain target are undefined for the given estimates.
class DegenerateState : public Error {
public:
    using Error::Error;
};

/// No nonnegative gain satisfies the scheduling constraints at this instant.
class InfeasibleGain : public Error {
public:
    using Error::Error;
};

/// A postcondition that holds by construction was found violated.
class InternalInconsistency : public Error {
public:
    using Error::Error;
};

/// The integrator produced a non-finite value.
class IntegrationFailure : public Error {
public:
    IntegrationFailure(const std::string& what, double time)
        : Error(what + " (t = " + std::to_string(time) + " days)"), time_(time)
    {
    }

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// One violated configuration rule: the offending field and the rule it broke.
struct ValidationIssue {
    std::string field;
    std::string rule;
};

/// Raised by configuration loading; carries every violated rule, not just the first.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ValidationIssue> issues)
        : Error(format(issues)), issues_(std::move(issues))
    {
    }

    ConfigError(const std::string& field, const std::string& rule)
        : ConfigError(std::vector<ValidationIssue>{{field, rule}})
    {
    }

    const std::vector<ValidationIssue>& issues() const noexcept { return issues_; }

private:
    static std::string format(const std::vector<ValidationIssue>& issues)
    {
        std::string msg = "invalid configuration:";
        for (const auto& issue : issues) {
            msg += "\n  " + issue.field + ": " + issue.rule;
        }
        return msg;
    }

    std::vector<ValidationIssue> issues_;
};

} // namespace ivobs
