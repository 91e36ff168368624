#pragma once

// The two max-stable constructions:
//  * Hüsler–Reiss type: pointwise maxima of n transformed Gaussian fields
//    sampled on the (s_n, t_n)-rescaled grid;
//  * the space-time storm-profile model η(s,t) = max_j ξ_j f0(z_j - s, x_j - t)
//    with f0 the N(0, diag(Σ, σ3²)) density.

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "stmax/covmodels.hpp"
#include "stmax/gaussfield.hpp"

namespace stmax {

enum class MarginalKind { Frechet, Gumbel, Weibull };

/// Per-replication transform of a standard normal value:
/// Fréchet -1/log Φ(z), Gumbel -log(-log Φ(z)), Weibull log Φ(z).
/// log Φ(z) is clamped to [log 1e-300, log(1 - 1e-16)] so saturation of Φ
/// never produces infinities.
double transform_marginal(double z, MarginalKind kind);

/// Outer normalisation applied to the maximum of n transformed values:
/// Fréchet m/n, Gumbel m - log n, Weibull n·m.
double normalize_maximum(double maximum, long long n, MarginalKind kind);

/// CDF of the standard limit law: exp(-1/y), exp(-e^{-y}), exp(y) (y <= 0).
double marginal_cdf(double y, MarginalKind kind);

/// Maps a threshold on the given margin to the equivalent Fréchet
/// threshold: Fréchet y, Gumbel e^y, Weibull -1/y.
double to_frechet_scale(double y, MarginalKind kind);

/// Samples Hüsler–Reiss type fields on a fixed grid. The covariance on the
/// rescaled grid is factorised once at construction; realizations are then
/// independent and reproducible from (seed, realization index).
class HuslerReissSimulator {
 public:
  HuslerReissSimulator(const CorrelationModel& model, std::shared_ptr<const SpaceTimeGrid> grid,
                       long long n, const JitterPolicy& jitter = {});

  long long replications() const noexcept { return n_; }
  double jitter_used() const noexcept { return factor_.jitter_used; }
  const ScalingSequences& scaling() const noexcept { return scaling_; }
  const std::shared_ptr<const SpaceTimeGrid>& grid() const noexcept { return grid_; }

  /// The worker count only splits the replications; results do not depend on it.
  FieldSample realization(MarginalKind kind, std::uint64_t seed, std::uint32_t index,
                          std::size_t workers = 1) const;

 private:
  std::shared_ptr<const SpaceTimeGrid> grid_;
  long long n_;
  ScalingSequences scaling_;
  CholeskyFactor factor_;
};

FieldSample husler_reiss_field(const CorrelationModel& model,
                               std::shared_ptr<const SpaceTimeGrid> grid, long long n,
                               MarginalKind kind, std::uint64_t seed);

/// Kernel covariance diag(Σ, σ3²) and the event-generation controls.
struct StormModelParams {
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Identity();
  double sigma3_sq = 1.0;
  /// Domain extension around the grid in per-axis standard deviations.
  double buffer = 4.0;
  /// Events with intensity ξ below this are discarded (each could add at
  /// most intensity_floor · f0(0) to any value).
  double intensity_floor = default_intensity_floor();

  /// 1e-6 times the standard Fréchet median 1/log 2.
  static double default_intensity_floor() noexcept;

  /// Throws DomainError unless Σ is SPD, σ3² > 0, buffer >= 0, floor > 0.
  void validate() const;
  Eigen::Matrix3d kernel_covariance() const;
};

struct StormEvent {
  double xi;
  Eigen::Vector2d center;
  double peak_time;
};

/// The Gaussian storm profile f0(dz, dx).
class StormKernel {
 public:
  explicit StormKernel(const StormModelParams& params);

  double operator()(const Eigen::Vector2d& dz, double dx) const noexcept;
  /// f0(0, 0) = (2π)^{-3/2} |Σ|^{-1/2} σ3^{-1}.
  double peak() const noexcept { return peak_; }

 private:
  Eigen::Matrix2d sigma_inv_;
  double inv_sigma3_sq_;
  double peak_;
};

/// values[i] = max(values[i], ξ f0(z - s_i, x - t_i)).
void accumulate_event(FieldSample& field, const StormKernel& kernel, const StormEvent& event);

/// Field generated by an explicit event list, starting from zero.
FieldSample storm_field_from_events(const StormModelParams& params,
                                    std::shared_ptr<const SpaceTimeGrid> grid,
                                    const std::vector<StormEvent>& events);

/// One storm-model realization. Intensities are ξ_j = |B| / Γ_j with Γ_j the
/// arrival times of a unit-rate Poisson process and |B| the volume of the
/// buffered bounding box; centres are uniform on B. Generation stops once
/// ξ_j f0(0) falls below the current field minimum (no later event can
/// change any value) or ξ_j drops below the intensity floor.
FieldSample simulate_storm_field(const StormModelParams& params,
                                 std::shared_ptr<const SpaceTimeGrid> grid, std::uint64_t seed,
                                 std::uint32_t realization = 0,
                                 std::vector<StormEvent>* events_used = nullptr);

/// Storm parameters reproducing δ(h,u) = C1 |h|² + C2 u²: Σ = I/(4 C1),
/// σ3² = 1/(4 C2). With an anisotropy (or axis-weighted expansion) Σ is
/// the inverse of 4·Q where δ's spatial part is hᵀ Q h.
/// Throws UnsupportedModelError unless α1 = α2 = 2 and d = 2.
StormModelParams equivalent_storm_params(
    const SmoothnessExpansion& exp,
    const std::optional<AnisotropyTransform>& aniso = std::nullopt);

}  // namespace stmax
