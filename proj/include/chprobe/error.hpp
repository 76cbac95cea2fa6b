#pragma once

#include <stdexcept>
#include <string>

namespace chprobe {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Physically or mathematically invalid input (non-positive power, empty path...).
class DomainError : public Error {
public:
  using Error::Error;
};

// Inconsistent configuration (probe does not fit its slot, unknown name...).
class ConfigError : public Error {
public:
  using Error::Error;
};

// Malformed input files.
class ParseError : public Error {
public:
  using Error::Error;
};

// Quadratic characterization could not be built.
class FitError : public Error {
public:
  FitError(const std::string& what, double derivative_zero_osnr_db)
      : Error(what), derivative_zero_osnr_db_(derivative_zero_osnr_db) {}
  explicit FitError(const std::string& what) : FitError(what, 0.0) {}

  // OSNR at which the fitted derivative crosses zero, when the failure is a
  // monotonicity violation; 0 otherwise.
  double derivative_zero_osnr_db() const noexcept { return derivative_zero_osnr_db_; }

private:
  double derivative_zero_osnr_db_;
};

// A Q reading lies outside the characterized Q interval.
class ExtrapolationError : public Error {
public:
  ExtrapolationError(const std::string& what, double nearest_q_db, double nearest_osnr_db)
      : Error(what), nearest_q_db_(nearest_q_db), nearest_osnr_db_(nearest_osnr_db) {}

  double nearest_q_db() const noexcept { return nearest_q_db_; }
  double nearest_osnr_db() const noexcept { return nearest_osnr_db_; }

private:
  double nearest_q_db_;
  double nearest_osnr_db_;
};

}  // namespace chprobe
