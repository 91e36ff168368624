#include "stmax/maxstable.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stmax/numerics.hpp"
#include "stmax/parallel.hpp"

namespace stmax {

namespace {

const double kLogPhiMin = std::log(1e-300);
const double kLogPhiMax = std::log1p(-1e-16);

// Replications are processed in fixed blocks keyed by replication index,
// so the floating-point work is identical for every worker count.
constexpr std::uint32_t kReplicationBlock = 64;

double clamped_log_phi(double z) {
  return std::clamp(std_normal_log_cdf(z), kLogPhiMin, kLogPhiMax);
}

}  // namespace

// ---------------------------------------------------------------------------
// Marginals

double transform_marginal(double z, MarginalKind kind) {
  if (!std::isfinite(z)) throw DomainError("transform_marginal: non-finite input");
  const double log_phi = clamped_log_phi(z);
  switch (kind) {
    case MarginalKind::Frechet: return -1.0 / log_phi;
    case MarginalKind::Gumbel: return -std::log(-log_phi);
    case MarginalKind::Weibull: return log_phi;
  }
  return log_phi;
}

double normalize_maximum(double maximum, long long n, MarginalKind kind) {
  if (n < 1) throw DomainError("normalize_maximum: n must be >= 1");
  const double nn = static_cast<double>(n);
  switch (kind) {
    case MarginalKind::Frechet: return maximum / nn;
    case MarginalKind::Gumbel: return maximum - std::log(nn);
    case MarginalKind::Weibull: return nn * maximum;
  }
  return maximum;
}

double marginal_cdf(double y, MarginalKind kind) {
  switch (kind) {
    case MarginalKind::Frechet: return y > 0.0 ? std::exp(-1.0 / y) : 0.0;
    case MarginalKind::Gumbel: return std::exp(-std::exp(-y));
    case MarginalKind::Weibull: return y < 0.0 ? std::exp(y) : 1.0;
  }
  return 0.0;
}

double to_frechet_scale(double y, MarginalKind kind) {
  switch (kind) {
    case MarginalKind::Frechet:
      if (!(y > 0.0)) throw DomainError("Frechet thresholds must be positive");
      return y;
    case MarginalKind::Gumbel: return std::exp(y);
    case MarginalKind::Weibull:
      if (!(y < 0.0)) throw DomainError("Weibull thresholds must be negative");
      return -1.0 / y;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Hüsler–Reiss construction

HuslerReissSimulator::HuslerReissSimulator(const CorrelationModel& model,
                                           std::shared_ptr<const SpaceTimeGrid> grid, long long n,
                                           const JitterPolicy& jitter)
    : grid_(std::move(grid)), n_(n) {
  if (!grid_) throw DomainError("HuslerReissSimulator: missing grid");
  if (n < 2) throw DomainError("Husler-Reiss construction needs n >= 2");
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("Husler-Reiss construction: n exceeds the substream range");
  }
  scaling_ = scaling_sequences(expansion(model), n);
  factor_ = cholesky(build_covariance_matrix(model, *grid_, scaling_), jitter);
}

FieldSample HuslerReissSimulator::realization(MarginalKind kind, std::uint64_t seed,
                                              std::uint32_t index, std::size_t workers) const {
  const auto n = static_cast<std::uint32_t>(n_);
  const std::uint32_t blocks = (n + kReplicationBlock - 1) / kReplicationBlock;
  const auto size = static_cast<Eigen::Index>(grid_->size());
  std::vector<Eigen::VectorXd> block_max(blocks);
  parallel_for(blocks, workers, [&](std::size_t b) {
    const std::uint32_t first = static_cast<std::uint32_t>(b) * kReplicationBlock;
    const std::uint32_t count = std::min(kReplicationBlock, n - first);
    block_max[b] = sample_replications(factor_, seed, index, first, count).rowwise().maxCoeff();
  });
  // Every transform is increasing in z, so the maximum of the transformed
  // replications is the transform of the maximal Gaussian value.
  Eigen::VectorXd zmax = Eigen::VectorXd::Constant(size, -std::numeric_limits<double>::infinity());
  for (const auto& m : block_max) zmax = zmax.cwiseMax(m);

  FieldSample out;
  out.grid = grid_;
  out.values.resize(static_cast<std::size_t>(size));
  for (Eigen::Index i = 0; i < size; ++i) {
    out.values[static_cast<std::size_t>(i)] =
        normalize_maximum(transform_marginal(zmax[i], kind), n_, kind);
  }
  out.seed_info = {seed, index};
  out.jitter_used = factor_.jitter_used;
  return out;
}

FieldSample husler_reiss_field(const CorrelationModel& model,
                               std::shared_ptr<const SpaceTimeGrid> grid, long long n,
                               MarginalKind kind, std::uint64_t seed) {
  return HuslerReissSimulator(model, std::move(grid), n).realization(kind, seed, 0);
}

// ---------------------------------------------------------------------------
// Storm-profile model

double StormModelParams::default_intensity_floor() noexcept {
  return 1e-6 / std::numbers::ln2;
}

void StormModelParams::validate() const {
  if (!sigma.allFinite() || std::abs(sigma(0, 1) - sigma(1, 0)) > 1e-12 * sigma.cwiseAbs().maxCoeff()) {
    throw DomainError("storm spatial covariance must be finite and symmetric");
  }
  if (!(sigma(0, 0) > 0.0) || !(sigma.determinant() > 0.0)) {
    throw DomainError("storm spatial covariance must be positive definite");
  }
  if (!(sigma3_sq > 0.0) || !std::isfinite(sigma3_sq)) {
    throw DomainError("storm temporal variance must be positive");
  }
  if (!(buffer >= 0.0) || !std::isfinite(buffer)) throw DomainError("storm buffer must be >= 0");
  if (!(intensity_floor > 0.0)) throw DomainError("storm intensity floor must be positive");
}

Eigen::Matrix3d StormModelParams::kernel_covariance() const {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov.topLeftCorner<2, 2>() = sigma;
  cov(2, 2) = sigma3_sq;
  return cov;
}

StormKernel::StormKernel(const StormModelParams& params) {
  params.validate();
  sigma_inv_ = params.sigma.inverse();
  inv_sigma3_sq_ = 1.0 / params.sigma3_sq;
  peak_ = gaussian_density_3d(Eigen::Vector3d::Zero(), params.kernel_covariance());
}

double StormKernel::operator()(const Eigen::Vector2d& dz, double dx) const noexcept {
  const double q = dz.dot(sigma_inv_ * dz) + dx * dx * inv_sigma3_sq_;
  return peak_ * std::exp(-0.5 * q);
}

void accumulate_event(FieldSample& field, const StormKernel& kernel, const StormEvent& event) {
  const SpaceTimeGrid& grid = *field.grid;
  const auto& space = grid.spatial_points();
  const auto& times = grid.time_points();
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double dx = event.peak_time - times[ti];
    for (std::size_t si = 0; si < space.size(); ++si) {
      const Eigen::Vector2d dz(event.center[0] - space[si][0], event.center[1] - space[si][1]);
      double& value = field.values[grid.index(si, ti)];
      value = std::max(value, event.xi * kernel(dz, dx));
    }
  }
}

namespace {

void require_planar(const SpaceTimeGrid& grid) {
  if (grid.dim() != 2) throw DomainError("storm model needs a 2-d spatial grid");
}

}  // namespace

FieldSample storm_field_from_events(const StormModelParams& params,
                                    std::shared_ptr<const SpaceTimeGrid> grid,
                                    const std::vector<StormEvent>& events) {
  if (!grid) throw DomainError("storm_field_from_events: missing grid");
  require_planar(*grid);
  const StormKernel kernel(params);
  FieldSample field;
  field.values.assign(grid->size(), 0.0);
  field.grid = std::move(grid);
  for (const auto& e : events) accumulate_event(field, kernel, e);
  return field;
}

FieldSample simulate_storm_field(const StormModelParams& params,
                                 std::shared_ptr<const SpaceTimeGrid> grid, std::uint64_t seed,
                                 std::uint32_t realization, std::vector<StormEvent>* events_used) {
  if (!grid) throw DomainError("simulate_storm_field: missing grid");
  require_planar(*grid);
  const StormKernel kernel(params);

  // Bounding box of the grid, extended by buffer standard deviations.
  std::array<double, 3> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& p : grid->spatial_points()) {
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  for (double t : grid->time_points()) {
    lo[2] = std::min(lo[2], t);
    hi[2] = std::max(hi[2], t);
  }
  const std::array<double, 3> sd{std::sqrt(params.sigma(0, 0)), std::sqrt(params.sigma(1, 1)),
                                 std::sqrt(params.sigma3_sq)};
  double volume = 1.0;
  for (int a = 0; a < 3; ++a) {
    lo[a] -= params.buffer * sd[a];
    hi[a] += params.buffer * sd[a];
    volume *= hi[a] - lo[a];
  }

  FieldSample field;
  field.values.assign(grid->size(), 0.0);
  field.grid = std::move(grid);
  field.seed_info = {seed, realization};

  RandomStream stream({seed, realization, 0});
  double arrival = 0.0;
  double field_min = 0.0;
  while (true) {
    arrival += stream.exponential();
    const double xi = volume / arrival;
    if (xi * kernel.peak() < field_min || xi < params.intensity_floor) break;
    StormEvent event{xi, Eigen::Vector2d::Zero(), 0.0};
    event.center[0] = lo[0] + (hi[0] - lo[0]) * stream.uniform();
    event.center[1] = lo[1] + (hi[1] - lo[1]) * stream.uniform();
    event.peak_time = lo[2] + (hi[2] - lo[2]) * stream.uniform();
    accumulate_event(field, kernel, event);
    field_min = *std::min_element(field.values.begin(), field.values.end());
    if (events_used) events_used->push_back(event);
  }
  return field;
}

StormModelParams equivalent_storm_params(const SmoothnessExpansion& exp,
                                         const std::optional<AnisotropyTransform>& aniso) {
  exp.validate();
  if (exp.alpha1 != 2.0 || exp.alpha2 != 2.0) {
    throw UnsupportedModelError(
        "storm model reproduces only alpha1 = alpha2 = 2 (Gaussian-type smoothness)");
  }
  if (!exp.axis_weights.empty() && exp.axis_weights.size() != 2) {
    throw UnsupportedModelError("storm model is two-dimensional in space");
  }
  if (!(exp.c1 > 0.0) || !(exp.c2 > 0.0)) {
    throw UnsupportedModelError("storm model needs C1 > 0 and C2 > 0");
  }
  Eigen::Matrix2d q = exp.c1 * Eigen::Matrix2d::Identity();
  if (!exp.axis_weights.empty()) {
    q = exp.c1 * Eigen::Vector2d(exp.axis_weights[0], exp.axis_weights[1]).asDiagonal();
  }
  if (aniso) q = aniso->matrix().transpose() * q * aniso->matrix();
  if (!(q.determinant() > 0.0)) {
    throw UnsupportedModelError("spatial part of delta is degenerate; no storm kernel matches");
  }
  StormModelParams params;
  params.sigma = (4.0 * q).inverse();
  params.sigma = 0.5 * (params.sigma + params.sigma.transpose()).eval();
  params.sigma3_sq = 1.0 / (4.0 * exp.c2);
  return params;
}

}  // namespace stmax
