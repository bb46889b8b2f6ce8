#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace imcf {

/// Argument outside the domain or range of a map (e.g. r outside I).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative numerics that did not converge, or non-finite intermediate values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, schemas, or incompatible initial data.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Too few samples for a fit.
class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The flow denominator n*lambda' - contraction became nonpositive (H <= 0).
class SingularityError : public std::runtime_error {
 public:
  SingularityError(std::size_t node, double theta, double psi, double denominator);

  std::size_t node() const noexcept { return node_; }
  double theta() const noexcept { return theta_; }
  double psi() const noexcept { return psi_; }
  double denominator() const noexcept { return denominator_; }

 private:
  std::size_t node_;
  double theta_;
  double psi_;
  double denominator_;
};

}  // namespace imcf
