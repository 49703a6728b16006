#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace epf {

/// Base class for all library errors. Subclasses distinguish bad input
/// (parse/validation/config) from numerical degeneracies so callers can map
/// them to exit codes; kind() names the concrete type for diagnostics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const { return "Error"; }
};

class ParseError : public Error {
 public:
  using Error::Error;
  const char* kind() const override { return "ParseError"; }
};

class GapError : public Error {
 public:
  using Error::Error;
  const char* kind() const override { return "GapError"; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const override { return "ValidationError"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const override { return "ConfigError"; }
};

class HistoryError : public Error {
 public:
  using Error::Error;
  const char* kind() const override { return "HistoryError"; }
};

class DegenerateScaleError : public Error {
 public:
  using Error::Error;
  const char* kind() const override { return "DegenerateScaleError"; }
};

class DegenerateTestError : public Error {
 public:
  using Error::Error;
  const char* kind() const override { return "DegenerateTestError"; }
};

/// Thrown when an iterative fit exceeds its sweep budget; carries the last
/// iterate so callers can inspect how far the solver got.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate)
      : Error(what), last_iterate(std::move(last_iterate)) {}
  const char* kind() const override { return "ConvergenceError"; }

  Eigen::VectorXd last_iterate;
};

}  // namespace epf
