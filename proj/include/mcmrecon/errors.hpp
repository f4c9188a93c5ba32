#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcmrecon {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    /// Short machine-readable tag, e.g. "parse_error".
    virtual const char* kind() const noexcept { return "error"; }
    /// True for failures caused by bad input rather than numerics.
    virtual bool user_error() const noexcept { return false; }
};

class ParseError : public Error {
public:
    ParseError(int line, const std::string& msg)
        : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const noexcept { return line_; }
    const char* kind() const noexcept override { return "parse_error"; }
    bool user_error() const noexcept override { return true; }

private:
    int line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "validation_error"; }
    bool user_error() const noexcept override { return true; }
};

class IntegrationError : public Error {
public:
    enum class Reason { StepUnderflow, MaxSteps, NonFinite };

    IntegrationError(Reason reason, double t, std::ptrdiff_t component, const std::string& msg)
        : Error(msg), reason_(reason), time_(t), component_(component) {}

    Reason reason() const noexcept { return reason_; }
    double time() const noexcept { return time_; }
    /// Offending state component, or -1 when not attributable.
    std::ptrdiff_t component() const noexcept { return component_; }
    const char* kind() const noexcept override { return "integration_error"; }

private:
    Reason reason_;
    double time_;
    std::ptrdiff_t component_;
};

/// The truncated state space kept leaking probability after all enlargement rounds.
class TruncationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "truncation_error"; }
};

class DegenerateMoments : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "degenerate_moments"; }
};

class NewtonDivergence : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "newton_divergence"; }
};

class SupportExplosion : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "support_explosion"; }
};

/// Every component of a stitched reconstruction failed.
class ReconstructionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "reconstruction_failed"; }
};

}  // namespace mcmrecon
