#pragma once

#include <stdexcept>
#include <string>

namespace mlnv {

// Input outside the mathematical domain of a function (p outside (0,1), NaN, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller passed inconsistent arguments (wrong mode, length mismatch, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Instance generation ranges or parameters violate an invariant.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed instance document. field() names the offending key.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Analytic Hessian evaluated at a point where a distance is exactly zero.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative solver ran out of iterations. Carries the last iterate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double x, double y, double gradient_norm)
      : std::runtime_error(what), x_(x), y_(y), gradient_norm_(gradient_norm) {}
  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  double gradient_norm() const noexcept { return gradient_norm_; }

 private:
  double x_;
  double y_;
  double gradient_norm_;
};

}  // namespace mlnv
