#include "stmax/gaussfield.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace stmax {

SpaceTimeGrid::SpaceTimeGrid(int dim, std::vector<Point> spatial_points,
                             std::vector<double> time_points)
    : dim_(dim), spatial_(std::move(spatial_points)), times_(std::move(time_points)) {
  if (dim_ < 1 || dim_ > kMaxSpatialDim) throw DomainError("grid dimension must be 1, 2 or 3");
  if (spatial_.empty() || times_.empty()) throw DomainError("grid needs at least one point");
  std::set<Point> seen_space;
  for (auto& p : spatial_) {
    for (int i = dim_; i < kMaxSpatialDim; ++i) p[i] = 0.0;
    for (int i = 0; i < dim_; ++i) {
      if (!std::isfinite(p[i])) throw DomainError("grid coordinates must be finite");
    }
    if (!seen_space.insert(p).second) throw DomainError("grid spatial points must be distinct");
  }
  std::set<double> seen_time;
  for (double t : times_) {
    if (!std::isfinite(t)) throw DomainError("grid times must be finite");
    if (!seen_time.insert(t).second) throw DomainError("grid time points must be distinct");
  }
}

SpaceTimeGrid SpaceTimeGrid::regular(const std::vector<int>& counts, double spacing,
                                     const std::vector<double>& origin,
                                     std::vector<double> time_points) {
  const int dim = static_cast<int>(counts.size());
  if (dim < 1 || dim > kMaxSpatialDim) throw DomainError("grid dimension must be 1, 2 or 3");
  if (!origin.empty() && origin.size() != counts.size()) {
    throw DomainError("grid origin must match the number of axes");
  }
  if (!(spacing > 0.0)) throw DomainError("grid spacing must be positive");
  for (int c : counts) {
    if (c < 1) throw DomainError("grid counts must be >= 1");
  }
  std::vector<Point> points;
  std::array<int, kMaxSpatialDim> n{1, 1, 1};
  for (int i = 0; i < dim; ++i) n[i] = counts[i];
  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        Point p{};
        const std::array<int, kMaxSpatialDim> idx{i, j, k};
        for (int a = 0; a < dim; ++a) {
          p[a] = (origin.empty() ? 0.0 : origin[a]) + spacing * idx[a];
        }
        points.push_back(p);
      }
    }
  }
  return SpaceTimeGrid(dim, std::move(points), std::move(time_points));
}

SpaceTimePoint SpaceTimeGrid::point(std::size_t flat_index) const {
  SpaceTimePoint p;
  p.dim = dim_;
  p.s = spatial_[flat_index % spatial_.size()];
  p.t = times_[flat_index / spatial_.size()];
  return p;
}

Eigen::MatrixXd build_covariance_matrix(const CorrelationModel& model, const SpaceTimeGrid& grid,
                                        std::optional<ScalingSequences> scale) {
  if (model.dim() != grid.dim()) {
    throw DomainError("grid dimension does not match model dimension");
  }
  const double s = scale ? scale->s_n : 1.0;
  const double t = scale ? scale->t_n : 1.0;
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const SpaceTimePoint pi = grid.point(static_cast<std::size_t>(i));
    m(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const SpaceTimeLag lag = (pi - grid.point(static_cast<std::size_t>(j))).scaled(s, t);
      const double r = model.correlation(lag);
      m(i, j) = r;
      m(j, i) = r;
    }
  }
  return m;
}

namespace {

struct PivotReport {
  std::size_t index = 0;
  double value = 0.0;
  std::size_t failures = 0;
};

// Unblocked right-looking pass over the lower triangle that records every
// nonpositive pivot (the offending column is dropped and elimination goes on).
PivotReport scan_pivots(Eigen::MatrixXd a) {
  PivotReport report;
  report.value = std::numeric_limits<double>::infinity();
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double pivot = a(k, k);
    if (!(pivot > 0.0)) {
      ++report.failures;
      if (pivot < report.value) {
        report.value = pivot;
        report.index = static_cast<std::size_t>(k);
      }
      continue;
    }
    const double root = std::sqrt(pivot);
    a.col(k).tail(n - k - 1) /= root;
    for (Eigen::Index j = k + 1; j < n; ++j) {
      a.col(j).tail(n - j) -= a(j, k) * a.col(k).tail(n - j);
    }
  }
  return report;
}

}  // namespace

CholeskyFactor cholesky(const Eigen::MatrixXd& m, const JitterPolicy& policy) {
  if (m.rows() != m.cols() || m.rows() == 0) throw MatrixError("cholesky: matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw MatrixError("cholesky: matrix is not symmetric");
  }
  double jitter = 0.0;
  Eigen::MatrixXd work;
  while (true) {
    work = m;
    work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(work);
    if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().allFinite()) {
      CholeskyFactor out;
      out.lower = llt.matrixL();
      out.jitter_used = jitter;
      return out;
    }
    if (jitter >= policy.max) break;
    jitter = jitter == 0.0 ? policy.initial : std::min(jitter * policy.factor, policy.max);
  }
  const PivotReport report = scan_pivots(std::move(work));
  std::ostringstream msg;
  msg << "cholesky: matrix not positive definite after jitter " << jitter << "; "
      << report.failures << " nonpositive pivot(s), most negative pivot " << report.value
      << " at index " << report.index;
  throw FactorizationError(msg.str(), report.index, report.value);
}

FieldSample sample_field(const CholeskyFactor& factor, std::shared_ptr<const SpaceTimeGrid> grid,
                         RandomStream& stream) {
  if (!grid || grid->size() != factor.size()) {
    throw DomainError("sample_field: factor size does not match grid");
  }
  const auto n = static_cast<Eigen::Index>(factor.size());
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = stream.normal();
  const Eigen::VectorXd y = factor.lower.triangularView<Eigen::Lower>() * z;
  FieldSample out;
  out.grid = std::move(grid);
  out.values.assign(y.data(), y.data() + n);
  out.seed_info = {stream.id().seed, stream.id().realization};
  out.jitter_used = factor.jitter_used;
  return out;
}

Eigen::MatrixXd sample_replications(const CholeskyFactor& factor, std::uint64_t seed,
                                    std::uint32_t realization, std::uint32_t first,
                                    std::uint32_t count) {
  const auto n = static_cast<Eigen::Index>(factor.size());
  Eigen::MatrixXd z(n, count);
  for (std::uint32_t j = 0; j < count; ++j) {
    RandomStream stream({seed, realization, first + j});
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = stream.normal();
  }
  return factor.lower.triangularView<Eigen::Lower>() * z;
}

}  // namespace stmax
