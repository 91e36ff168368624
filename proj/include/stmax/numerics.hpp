#pragma once

#include <Eigen/Core>

#include "stmax/errors.hpp"

namespace stmax {

/// A real number in [0, 1].
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double value);

  constexpr double value() const noexcept { return value_; }
  constexpr operator double() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

/// Standard normal CDF. Throws DomainError for non-finite x.
Probability std_normal_cdf(double x);

/// Upper tail 1 - Φ(x), accurate in the far right tail.
double std_normal_ccdf(double x);

/// log Φ(x) without cancellation for large positive x.
double std_normal_log_cdf(double x);

/// Standard normal density.
double std_normal_pdf(double x) noexcept;

/// Inverse of std_normal_cdf on (0, 1); Φ(result) = p to ~1e-16.
double std_normal_quantile(double p);

/// N(0, cov) density at v. Throws MatrixError unless cov is symmetric
/// positive definite.
double gaussian_density_3d(const Eigen::Vector3d& v, const Eigen::Matrix3d& cov);

}  // namespace stmax
