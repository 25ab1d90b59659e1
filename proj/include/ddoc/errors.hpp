#pragma once

#include <stdexcept>
#include <string>

namespace ddoc {

// Base for all library errors. `code()` is a stable machine-readable
// identifier; `what()` is the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& msg) : Error("invalid-input", msg) {}
};

class InvalidDepthError : public Error {
public:
    explicit InvalidDepthError(const std::string& msg) : Error("invalid-depth", msg) {}
};

class InvalidIndexError : public Error {
public:
    explicit InvalidIndexError(const std::string& msg) : Error("invalid-index", msg) {}
};

// Linear system H*x = g has no solution within tolerance.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& msg, double residual)
        : Error("infeasible", msg), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class InsufficientExcitationError : public Error {
public:
    InsufficientExcitationError(const std::string& msg, int failing_order)
        : Error("insufficient-excitation", msg), order_(failing_order) {}
    int failing_order() const noexcept { return order_; }

private:
    int order_;
};

class InvalidSystemError : public Error {
public:
    explicit InvalidSystemError(const std::string& msg) : Error("invalid-system", msg) {}
};

class NoSteadyStateError : public Error {
public:
    explicit NoSteadyStateError(const std::string& msg) : Error("no-steady-state", msg) {}
};

class NumericalFailureError : public Error {
public:
    explicit NumericalFailureError(const std::string& msg) : Error("numerical-failure", msg) {}
};

class DataTooShortError : public Error {
public:
    explicit DataTooShortError(const std::string& msg) : Error("data-too-short", msg) {}
};

// Controller state windows are not consistent with any system trajectory
// (corrupted state or excessive noise).
class InconsistentWindowError : public Error {
public:
    InconsistentWindowError(const std::string& msg, double residual)
        : Error("inconsistent-window", msg), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Requested output is not a steady-state output of the data-generating system.
class InfeasibleOutputError : public Error {
public:
    InfeasibleOutputError(const std::string& msg, double residual)
        : Error("infeasible-output", msg), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class GenerationFailureError : public Error {
public:
    explicit GenerationFailureError(const std::string& msg) : Error("generation-failure", msg) {}
};

// Wraps an error raised inside a closed-loop step with the step index.
class StepFailureError : public Error {
public:
    StepFailureError(long step, const Error& inner)
        : Error(inner.code(), "step " + std::to_string(step) + ": " + inner.what()),
          step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

}  // namespace ddoc
