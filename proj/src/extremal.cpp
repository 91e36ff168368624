#include "stmax/extremal.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace stmax {

namespace {

// Φ extended to ±∞, for arguments like log(r)/(2√δ) with √δ underflowing.
double phi_ext(double x) {
  if (std::isnan(x)) throw DomainError("Phi: NaN argument");
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  return std_normal_cdf(x);
}

double checked_delta(double delta) {
  if (std::isnan(delta) || delta < 0.0) {
    throw DomainError("delta must be >= 0, got " + std::to_string(delta));
  }
  return delta;
}

}  // namespace

BivariatePair::BivariatePair(double y1, double y2) : y1_(y1), y2_(y2) {
  if (!(y1 > 0.0) || !(y2 > 0.0) || !std::isfinite(y1) || !std::isfinite(y2)) {
    throw DomainError("thresholds must be finite and > 0");
  }
}

double exponent_measure(const BivariatePair& pair, double delta) {
  checked_delta(delta);
  const double w1 = 1.0 / pair.y1();
  const double w2 = 1.0 / pair.y2();
  const double root = std::sqrt(delta);
  if (root == 0.0) return std::max(w1, w2);
  if (root > kIndependenceRootDelta) return w1 + w2;
  const double log_ratio = std::log(pair.y2() / pair.y1());
  return w1 * phi_ext(log_ratio / (2.0 * root) + root) +
         w2 * phi_ext(-log_ratio / (2.0 * root) + root);
}

Probability bivariate_cdf_hr(const BivariatePair& pair, double delta) {
  return Probability(std::exp(-exponent_measure(pair, delta)));
}

Probability bivariate_cdf_hr(double y1, double y2, double delta, MarginalKind kind) {
  return bivariate_cdf_hr(BivariatePair(to_frechet_scale(y1, kind), to_frechet_scale(y2, kind)),
                          delta);
}

double mahalanobis_norm(const StormModelParams& params, const Eigen::Vector2d& h) {
  params.validate();
  const Eigen::LLT<Eigen::Matrix2d> llt(params.sigma);
  if (llt.info() != Eigen::Success) throw DomainError("storm spatial covariance is not SPD");
  if (!h.allFinite()) throw DomainError("spatial lag must be finite");
  return llt.matrixL().solve(h).norm();
}

Probability bivariate_cdf_smith(const BivariatePair& pair, const Eigen::Vector2d& h, double u,
                                const StormModelParams& params) {
  if (!std::isfinite(u)) throw DomainError("time lag must be finite");
  const double a = mahalanobis_norm(params, h);
  if (a == 0.0 && u == 0.0) {
    return Probability(std::exp(-1.0 / std::min(pair.y1(), pair.y2())));
  }
  const double s3_sq = params.sigma3_sq;
  const double s3 = std::sqrt(s3_sq);
  const double d = s3_sq * a * a + u * u;
  const double denom = 2.0 * s3 * std::sqrt(d);
  const double log_ratio = std::log(pair.y2() / pair.y1());
  const double v = phi_ext((2.0 * s3_sq * log_ratio + d) / denom) / pair.y1() +
                   phi_ext((-2.0 * s3_sq * log_ratio + d) / denom) / pair.y2();
  return Probability(std::exp(-v));
}

double delta_from_storm(const StormModelParams& params, const Eigen::Vector2d& h, double u) {
  if (!std::isfinite(u)) throw DomainError("time lag must be finite");
  const double a = mahalanobis_norm(params, h);
  return 0.25 * a * a + u * u / (4.0 * params.sigma3_sq);
}

double pickands(double lambda, double delta) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw DomainError("pickands: lambda must lie in (0,1)");
  }
  checked_delta(delta);
  const double root = std::sqrt(delta);
  if (root == 0.0) return std::max(lambda, 1.0 - lambda);
  if (root > kIndependenceRootDelta) return 1.0;
  const double l = std::log(lambda / (1.0 - lambda));
  return lambda * phi_ext(l / (2.0 * root) + root) +
         (1.0 - lambda) * phi_ext(-l / (2.0 * root) + root);
}

double tail_dependence(double delta) {
  checked_delta(delta);
  const double root = std::sqrt(delta);
  if (root > kIndependenceRootDelta) return 0.0;
  return 2.0 * std_normal_ccdf(root);
}

namespace {

double empirical_quantile(std::span<const double> values, double q) {
  std::vector<double> sorted(values.begin(), values.end());
  const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()))) - 1;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
  return sorted[k];
}

}  // namespace

double empirical_tail_dependence(std::span<const double> site1, std::span<const double> site2,
                                 double q) {
  if (site1.size() != site2.size()) throw DomainError("site samples differ in length");
  if (site1.size() < 100) throw DomainError("empirical tail dependence needs >= 100 realizations");
  if (!(q > 0.5 && q < 1.0)) throw DomainError("empirical tail dependence needs 0.5 < q < 1");
  const double t1 = empirical_quantile(site1, q);
  const double t2 = empirical_quantile(site2, q);
  std::size_t joint = 0;
  std::size_t marginal = 0;
  for (std::size_t i = 0; i < site1.size(); ++i) {
    if (site2[i] > t2) {
      ++marginal;
      if (site1[i] > t1) ++joint;
    }
  }
  if (marginal == 0) throw EstimateError("no exceedances of the marginal quantile");
  return static_cast<double>(joint) / static_cast<double>(marginal);
}

double empirical_tail_dependence(const std::vector<FieldSample>& realizations, std::size_t site1,
                                 std::size_t site2, double q) {
  std::vector<double> a;
  std::vector<double> b;
  a.reserve(realizations.size());
  b.reserve(realizations.size());
  for (const auto& r : realizations) {
    if (site1 >= r.values.size() || site2 >= r.values.size()) {
      throw DomainError("site index outside the field");
    }
    a.push_back(r.values[site1]);
    b.push_back(r.values[site2]);
  }
  return empirical_tail_dependence(a, b, q);
}

double compute_bn(long long n) {
  if (n < 3) throw DomainError("b_n needs n >= 3");
  const double log_n = std::log(static_cast<double>(n));
  const double root = std::sqrt(2.0 * log_n);
  return root - (std::log(log_n) + std::log(4.0 * std::numbers::pi)) / (2.0 * root);
}

}  // namespace stmax
