#include "stmax/numerics.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace stmax {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Acklam's rational approximation to the normal quantile (relative error
// about 1.15e-9); only used as the starting point for Newton refinement.
double acklam_quantile(double p) {
  static constexpr std::array<double, 6> a{
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Solves log Φ(x) = log p for p in (0, 0.5]. log Φ is increasing and
// concave, so Newton iterates approach the root from the left after the
// first step; a bracket guards against a bad starting point.
double lower_quantile(double p) {
  const double target = std::log(p);
  double lo = -40.0;
  double hi = 0.0;
  double x = std::clamp(acklam_quantile(p), lo, hi);
  for (int iter = 0; iter < 60; ++iter) {
    const double g = std_normal_log_cdf(x) - target;
    if (g == 0.0) break;
    if (g < 0.0) lo = x; else hi = x;
    // d/dx log Φ(x) = φ(x) / Φ(x)
    const double cdf = 0.5 * std::erfc(-x * kInvSqrt2);
    const double slope = std_normal_pdf(x) / cdf;
    double next = x - g / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError("probability outside [0,1]: " + std::to_string(value));
  }
}

// Φ(x) = erfc(-x/√2)/2. glibc's erfc is the fdlibm rational-approximation
// scheme (Sun Microsystems, 1993) with sub-ulp error; the complement form
// keeps full relative accuracy in the left tail.
Probability std_normal_cdf(double x) {
  if (!std::isfinite(x)) throw DomainError("std_normal_cdf: non-finite argument");
  return Probability(0.5 * std::erfc(-x * kInvSqrt2));
}

double std_normal_ccdf(double x) {
  if (!std::isfinite(x)) throw DomainError("std_normal_ccdf: non-finite argument");
  return 0.5 * std::erfc(x * kInvSqrt2);
}

double std_normal_log_cdf(double x) {
  if (!std::isfinite(x)) throw DomainError("std_normal_log_cdf: non-finite argument");
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  return std::log(0.5 * std::erfc(-x * kInvSqrt2));
}

double std_normal_pdf(double x) noexcept {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("std_normal_quantile: p must lie in (0,1), got " +
                      std::to_string(p));
  }
  if (p <= 0.5) return lower_quantile(p);
  return -lower_quantile(1.0 - p);  // exact subtraction for p >= 0.5
}

double gaussian_density_3d(const Eigen::Vector3d& v, const Eigen::Matrix3d& cov) {
  if (!cov.isApprox(cov.transpose(), 1e-12)) {
    throw MatrixError("gaussian_density_3d: covariance is not symmetric");
  }
  const Eigen::LLT<Eigen::Matrix3d> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw MatrixError("gaussian_density_3d: covariance is not positive definite");
  }
  const Eigen::Vector3d w = llt.matrixL().solve(v);
  const Eigen::Vector3d diag = llt.matrixL().toDenseMatrix().diagonal();
  const double log_det = 2.0 * diag.array().log().sum();
  return std::exp(-1.5 * std::log(2.0 * std::numbers::pi) - 0.5 * log_det -
                  0.5 * w.squaredNorm());
}

}  // namespace stmax
