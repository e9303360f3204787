#pragma once

#include <stdexcept>
#include <string>

namespace eom {

/// Failure categories. The numeric values are the CLI exit codes where one exists.
enum class ErrorKind {
  config = 2,        ///< unreadable or invalid configuration
  no_stable = 3,     ///< no stable steady state where one is required
  io = 4,            ///< file system failure
  integrator = 5,    ///< time integration failed
  numeric = 6,       ///< singular system, NaN input, solver non-convergence
  argument = 7,      ///< bad call arguments
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  /// `field` names the offending key (may be empty for whole-document parse errors).
  ConfigError(std::string field, const std::string& what)
      : Error(ErrorKind::config, what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

class IntegratorError : public Error {
 public:
  IntegratorError(const std::string& what, double t_reached)
      : Error(ErrorKind::integrator, what), t_reached_(t_reached) {}
  /// Last time the integrator reached with a finite state.
  double t_reached() const noexcept { return t_reached_; }

 private:
  double t_reached_;
};

}  // namespace eom
