#pragma once

#include <stdexcept>
#include <string>

namespace v2gq {

// Failure categories. The C API and the CLI map each one to a distinct status
// or exit code, so every exception thrown by the library derives from Error.
enum class ErrorKind {
    io,
    parse,
    validation,
    convergence,
    infeasible,
    argument,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class ParseError : public Error {
  public:
    ParseError(const std::string& source, int line, const std::string& what)
        : Error(ErrorKind::parse, source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

  private:
    int line_;
};

class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class InfeasibleError : public Error {
  public:
    explicit InfeasibleError(const std::string& what) : Error(ErrorKind::infeasible, what) {}
};

class ArgumentError : public Error {
  public:
    explicit ArgumentError(const std::string& what) : Error(ErrorKind::argument, what) {}
};

// Newton iteration did not reach the mismatch tolerance.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string& what, int iterations, double final_mismatch, bool diverged)
        : Error(ErrorKind::convergence, what),
          iterations_(iterations),
          final_mismatch_(final_mismatch),
          diverged_(diverged) {}

    int iterations() const noexcept { return iterations_; }
    double final_mismatch() const noexcept { return final_mismatch_; }
    bool diverged() const noexcept { return diverged_; }

  private:
    int iterations_;
    double final_mismatch_;
    bool diverged_;
};

class SingularJacobianError : public ConvergenceError {
  public:
    SingularJacobianError(const std::string& what, int iteration, double final_mismatch, double step_residual)
        : ConvergenceError(what, iteration, final_mismatch, false), step_residual_(step_residual) {}

    // ||J dx + f|| / ||f|| of the failed Newton step; infinite when factorization broke down.
    double step_residual() const noexcept { return step_residual_; }

  private:
    double step_residual_;
};

}  // namespace v2gq
