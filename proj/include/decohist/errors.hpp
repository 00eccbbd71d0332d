#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace decohist {

/// Coarse classification used by the CLI to pick an exit status.
enum class ErrorCategory { validation, numerical, oracle };

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual ErrorCategory category() const noexcept { return ErrorCategory::validation; }
};

/// Branch index outside the declared coarse-graining range.
class RangeError : public Error {
public:
  using Error::Error;
};

/// Physical or numerical parameter outside its admissible set.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Operation called with parameters of the wrong system kind.
class KindError : public Error {
public:
  using Error::Error;
};

/// Oscillator parameters too close to a caustic (sin wT = 0) or a pole of g(T).
class CausticError : public Error {
public:
  using Error::Error;
};

/// Argument outside the accuracy domain of a special function.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Branch grids that do not share a grid were combined.
class GridError : public Error {
public:
  using Error::Error;
};

class GridTooSmallError : public Error {
public:
  GridTooSmallError(const std::string& what, double suggested_scale)
      : Error(what), suggested_scale_(suggested_scale) {}
  ErrorCategory category() const noexcept override { return ErrorCategory::numerical; }
  /// Factor by which the half-widths should grow.
  double suggested_scale() const noexcept { return suggested_scale_; }

private:
  double suggested_scale_;
};

class BudgetError : public Error {
public:
  BudgetError(const std::string& what, std::complex<double> partial = {})
      : Error(what), partial_(partial) {}
  ErrorCategory category() const noexcept override { return ErrorCategory::numerical; }
  std::complex<double> partial_estimate() const noexcept { return partial_; }

private:
  std::complex<double> partial_;
};

/// Every branch is empty, so no normalized metric exists.
class DegenerateError : public Error {
public:
  using Error::Error;
  ErrorCategory category() const noexcept override { return ErrorCategory::numerical; }
};

class OracleDisagreement : public Error {
public:
  using Error::Error;
  ErrorCategory category() const noexcept override { return ErrorCategory::oracle; }
};

}  // namespace decohist
