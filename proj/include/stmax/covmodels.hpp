#pragma once

// Stationary space-time correlation models, their small-lag expansions and
// the limit function δ(h, u) = C1 |h|^α1 + C2 |u|^α2 that drives the
// max-stable constructions.

#include <Eigen/Core>

#include <array>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stmax/errors.hpp"

namespace stmax {

inline constexpr int kMaxSpatialDim = 3;

/// Spatial displacement h (dimension 1..3) plus temporal displacement u.
struct SpaceTimeLag {
  std::array<double, kMaxSpatialDim> h{};
  int dim = 1;
  double u = 0.0;

  SpaceTimeLag() = default;
  SpaceTimeLag(std::span<const double> spatial, double temporal);
  SpaceTimeLag(std::initializer_list<double> spatial, double temporal);

  double spatial_norm() const noexcept;
  SpaceTimeLag negated() const noexcept;
  /// (s·h, t·u)
  SpaceTimeLag scaled(double s, double t) const noexcept;
};

/// A location in space-time; differences of points are lags.
struct SpaceTimePoint {
  std::array<double, kMaxSpatialDim> s{};
  int dim = 1;
  double t = 0.0;

  SpaceTimePoint() = default;
  SpaceTimePoint(std::initializer_list<double> spatial, double time);

  SpaceTimeLag operator-(const SpaceTimePoint& other) const;
  SpaceTimeLag as_lag() const;
};

/// Gneiting class with φ(x) = (1 + b x)^-ν and ψ(x) = (1 + a x)^γ:
///   ρ(h, u) = ψ(|u|^{2β2})^{-d/2} φ(|h|^{2β1} / ψ(|u|^{2β2})).
/// a = 0 is admitted (purely spatial model) but has no limit expansion.
struct GneitingModel {
  double a = 0.03;
  double b = 0.03;
  double nu = 1.5;
  double gamma = 1.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  int dim = 2;
};

/// ρ(h, u) = exp(-|h|²/C - λ|u|): Gaussian in space, Ornstein-Uhlenbeck in time.
struct SeparableModel {
  double range_c = 1.0;
  double lambda = 1.0;
  int dim = 2;
};

enum class BaseFamily { PoweredExponential, Cauchy };

/// Univariate correlation of a nonnegative distance r:
///   powered exponential exp(-(r/scale)^α),
///   Cauchy (1 + (r/scale)^α)^-β.
/// Both expand as 1 - C r^α with C = scale^-α (times β for Cauchy).
struct BaseCorrelation {
  BaseFamily family = BaseFamily::PoweredExponential;
  double scale = 1.0;
  double alpha = 2.0;
  double beta = 1.0;

  double operator()(double r) const noexcept;
  double one_minus(double r) const noexcept;
  double leading_constant() const noexcept;
};

/// One atom of a discrete mixing measure.
struct MixtureAtom {
  double v1 = 1.0;
  double v2 = 1.0;
  double weight = 1.0;
};

/// ρ(h, u) = Σ_k w_k ρ1(|h| v1_k) ρ2(|u| v2_k).
struct MaMixtureModel {
  std::vector<MixtureAtom> atoms;
  BaseCorrelation spatial;
  BaseCorrelation temporal;
  int dim = 2;
};

/// Bernstein function ψ(x) = 1 + c x^α, α in (0, 1].
struct BernsteinFunction {
  double c = 1.0;
  double alpha = 1.0;

  double operator()(double x) const noexcept;
};

/// C(h, u) = Σ_k w_k exp(-v1_k Σ_i ψ_i(|h_i|) - v2_k ψ_t(|u|)), normalised to
/// a correlation by C(0, 0). Spatial dimension = axes.size().
struct BernsteinModel {
  std::vector<BernsteinFunction> axes;
  BernsteinFunction time;
  std::vector<MixtureAtom> atoms;
};

/// Geometric anisotropy in the plane: A = T·R with R the counter-clockwise
/// rotation by `angle` and T = diag(1/a_max, 1/a_min).
class AnisotropyTransform {
 public:
  AnisotropyTransform(double a_max, double a_min, double angle_radians);

  double a_max() const noexcept { return a_max_; }
  double a_min() const noexcept { return a_min_; }
  double angle() const noexcept { return angle_; }
  const Eigen::Matrix2d& matrix() const noexcept { return matrix_; }

  Eigen::Vector2d apply(const Eigen::Vector2d& h) const { return matrix_ * h; }
  /// Lag with h replaced by A·h; the lag must be two-dimensional.
  SpaceTimeLag apply(const SpaceTimeLag& lag) const;

 private:
  double a_max_;
  double a_min_;
  double angle_;
  Eigen::Matrix2d matrix_;
};

Eigen::Vector2d apply_anisotropy(const AnisotropyTransform& t, const Eigen::Vector2d& h);

/// Small-lag behaviour ρ ≈ 1 - C1 |h|^α1 - C2 |u|^α2.
///
/// When `axis_weights` is non-empty the spatial term is axis-wise,
/// C1 Σ_i w_i |h_i|^α1, as produced by the Bernstein class; an empty vector
/// means the isotropic C1 |h|^α1.
struct SmoothnessExpansion {
  double alpha1 = 2.0;
  double alpha2 = 2.0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<double> axis_weights;

  /// Throws DomainError when exponents or constants are out of range.
  void validate() const;
  double spatial_term(const SpaceTimeLag& lag) const;
  double temporal_term(double u) const noexcept;
};

using ModelFamily =
    std::variant<GneitingModel, SeparableModel, MaMixtureModel, BernsteinModel>;

/// A validated, immutable correlation model, optionally wrapped in a
/// geometric anisotropy (2-d only).
class CorrelationModel {
 public:
  explicit CorrelationModel(ModelFamily family,
                            std::optional<AnisotropyTransform> anisotropy = {});

  const ModelFamily& family() const noexcept { return family_; }
  const std::optional<AnisotropyTransform>& anisotropy() const noexcept {
    return anisotropy_;
  }
  int dim() const noexcept { return dim_; }
  std::string family_name() const;

  double correlation(const SpaceTimeLag& lag) const;
  /// 1 - ρ computed without cancellation near the origin.
  double one_minus_correlation(const SpaceTimeLag& lag) const;

 private:
  SpaceTimeLag prepare(const SpaceTimeLag& lag) const;

  ModelFamily family_;
  std::optional<AnisotropyTransform> anisotropy_;
  int dim_;
  std::vector<double> tilted_weights_;  // Bernstein only
};

double correlation(const CorrelationModel& model, const SpaceTimeLag& lag);

/// Expansion of the unwrapped family (anisotropy enters through delta()).
/// Throws UnsupportedModelError for a Gneiting model with ψ'(0) = 0.
SmoothnessExpansion expansion(const CorrelationModel& model);

/// δ(h, u); h is replaced by A·h when an anisotropy is supplied.
double delta(const SmoothnessExpansion& exp, const SpaceTimeLag& lag,
             const std::optional<AnisotropyTransform>& aniso = std::nullopt);

/// δ for the model itself, anisotropy included.
double limit_delta(const CorrelationModel& model, const SpaceTimeLag& lag);

struct ScalingSequences {
  double s_n;
  double t_n;
};

/// s_n = (log n)^{-1/α1}, t_n = (log n)^{-1/α2}; n >= 2.
ScalingSequences scaling_sequences(const SmoothnessExpansion& exp, long long n);
/// Same with log n supplied directly (log_n > 0).
ScalingSequences scaling_sequences_from_log(const SmoothnessExpansion& exp, double log_n);

/// Cov(W(p1), W(p2)) = δ(p1) + δ(p2) - δ(p1 - p2) for the Gaussian field
/// with variogram δ, pinned to zero at the origin.
double variogram_to_covariance(const SmoothnessExpansion& exp, const SpaceTimePoint& p1,
                               const SpaceTimePoint& p2,
                               const std::optional<AnisotropyTransform>& aniso = std::nullopt);

}  // namespace stmax
