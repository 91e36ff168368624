#pragma once

// Exact sampling of zero-mean, unit-variance stationary Gaussian fields on
// finite space-time grids: dense covariance assembly + Cholesky.
//
// Dense storage bounds practical grid sizes to roughly N <= 12000 points.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "stmax/covmodels.hpp"
#include "stmax/rng.hpp"

namespace stmax {

/// Product of an ordered set of spatial points and an ordered set of time
/// points. Flattening is time-major: index = time_index * |space| + space_index.
/// Regular lattices list space points row-major (x fastest).
class SpaceTimeGrid {
 public:
  using Point = std::array<double, kMaxSpatialDim>;

  SpaceTimeGrid(int dim, std::vector<Point> spatial_points, std::vector<double> time_points);

  /// nx × ny (× nz) lattice with the given spacing and origin.
  static SpaceTimeGrid regular(const std::vector<int>& counts, double spacing,
                               const std::vector<double>& origin,
                               std::vector<double> time_points);

  int dim() const noexcept { return dim_; }
  std::size_t space_size() const noexcept { return spatial_.size(); }
  std::size_t time_size() const noexcept { return times_.size(); }
  std::size_t size() const noexcept { return spatial_.size() * times_.size(); }

  const std::vector<Point>& spatial_points() const noexcept { return spatial_; }
  const std::vector<double>& time_points() const noexcept { return times_; }

  std::size_t index(std::size_t space_index, std::size_t time_index) const noexcept {
    return time_index * spatial_.size() + space_index;
  }
  SpaceTimePoint point(std::size_t flat_index) const;

 private:
  int dim_;
  std::vector<Point> spatial_;
  std::vector<double> times_;
};

struct SeedInfo {
  std::uint64_t master_seed = 0;
  std::uint32_t realization = 0;
};

struct FieldSample {
  std::shared_ptr<const SpaceTimeGrid> grid;
  std::vector<double> values;
  SeedInfo seed_info;
  double jitter_used = 0.0;
};

struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter_used = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(lower.rows()); }
};

/// Jitter ε·I is tried in the sequence initial, initial·factor, ... up to max.
struct JitterPolicy {
  double initial = 1e-12;
  double factor = 10.0;
  double max = 1e-6;
};

/// Correlation matrix ρ(s_n(s_i - s_j), t_n(t_i - t_j)); unscaled when
/// `scale` is empty.
Eigen::MatrixXd build_covariance_matrix(const CorrelationModel& model, const SpaceTimeGrid& grid,
                                        std::optional<ScalingSequences> scale = std::nullopt);

/// Cholesky with escalating diagonal jitter. Throws MatrixError for a
/// non-symmetric input and FactorizationError when the largest jitter
/// still fails; the error names the most negative pivot.
CholeskyFactor cholesky(const Eigen::MatrixXd& m, const JitterPolicy& policy = {});

/// One field L·z with z drawn from `stream`.
FieldSample sample_field(const CholeskyFactor& factor, std::shared_ptr<const SpaceTimeGrid> grid,
                         RandomStream& stream);

/// Columns j = 0..count-1 hold L·z_j with z_j drawn from the stream
/// (seed, realization, first + j).
Eigen::MatrixXd sample_replications(const CholeskyFactor& factor, std::uint64_t seed,
                                    std::uint32_t realization, std::uint32_t first,
                                    std::uint32_t count);

}  // namespace stmax
