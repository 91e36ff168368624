#pragma once

// Closed-form bivariate dependence quantities of the two max-stable
// constructions (all on standard Fréchet margins unless stated otherwise),
// and finite-sample estimators.

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

#include "stmax/gaussfield.hpp"
#include "stmax/maxstable.hpp"
#include "stmax/numerics.hpp"

namespace stmax {

/// Fréchet-scale thresholds (y1, y2), both strictly positive.
class BivariatePair {
 public:
  BivariatePair(double y1, double y2);

  double y1() const noexcept { return y1_; }
  double y2() const noexcept { return y2_; }

 private:
  double y1_;
  double y2_;
};

/// √δ above this is treated as exact independence.
inline constexpr double kIndependenceRootDelta = 40.0;

/// V(y1, y2; δ) with F = exp(-V). δ may be +infinity (independence).
double exponent_measure(const BivariatePair& pair, double delta);

/// Hüsler–Reiss bivariate CDF
///   exp{-(1/y1) Φ(log(y2/y1)/(2√δ) + √δ) - (1/y2) Φ(log(y1/y2)/(2√δ) + √δ)}
/// with the δ = 0 (complete dependence) and δ = ∞ limits.
Probability bivariate_cdf_hr(const BivariatePair& pair, double delta);

/// Same law with thresholds on the given margin.
Probability bivariate_cdf_hr(double y1, double y2, double delta, MarginalKind kind);

/// a(h) = (hᵀ Σ⁻¹ h)^{1/2}.
double mahalanobis_norm(const StormModelParams& params, const Eigen::Vector2d& h);

/// Bivariate CDF of the storm-profile model at spatial lag h and time lag u.
/// At (h, u) = (0, 0) the two values coincide and F = exp(-1/min(y1, y2)).
Probability bivariate_cdf_smith(const BivariatePair& pair, const Eigen::Vector2d& h, double u,
                                const StormModelParams& params);

/// δ(h, u) = a(h)²/4 + u²/(4σ3²), the Hüsler–Reiss parameter with the same
/// bivariate law as the storm model.
double delta_from_storm(const StormModelParams& params, const Eigen::Vector2d& h, double u);

/// Pickands dependence function A(λ; δ), 0 < λ < 1.
double pickands(double lambda, double delta);

/// χ = 2(1 - Φ(√δ)).
double tail_dependence(double delta);

/// χ̂ at level q: the number of realizations exceeding the empirical
/// q-quantile at both sites over the number exceeding it at the second site.
/// Needs at least 100 realizations and 0.5 < q < 1; throws EstimateError if
/// no value exceeds the marginal quantile.
double empirical_tail_dependence(std::span<const double> site1, std::span<const double> site2,
                                 double q);
double empirical_tail_dependence(const std::vector<FieldSample>& realizations, std::size_t site1,
                                 std::size_t site2, double q);

/// b_n = √(2 log n) - (log log n + log 4π) / (2√(2 log n)), n >= 3.
double compute_bn(long long n);

}  // namespace stmax
