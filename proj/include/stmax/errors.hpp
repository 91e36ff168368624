#pragma once

#include <stdexcept>
#include <string>

namespace stmax {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A matrix argument lacks a required structural property (symmetry, SPD).
class MatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cholesky failed even after the maximum jitter.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(const std::string& what, std::size_t pivot_index,
                     double pivot_value)
      : std::runtime_error(what), pivot_index_(pivot_index),
        pivot_value_(pivot_value) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }
  double pivot_value() const noexcept { return pivot_value_; }

 private:
  std::size_t pivot_index_;
  double pivot_value_;
};

/// The model does not satisfy the hypotheses an operation relies on.
class UnsupportedModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator has no data to work with (e.g. zero exceedances).
class EstimateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stmax
