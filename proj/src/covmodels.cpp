#include "stmax/covmodels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace stmax {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxSpatialDim) {
    throw DomainError("spatial dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be positive and finite");
  }
}

void check_unit_interval(double v, const char* name) {
  if (!(v > 0.0 && v <= 1.0)) throw DomainError(std::string(name) + " must lie in (0,1]");
}

void check_atoms(const std::vector<MixtureAtom>& atoms) {
  if (atoms.empty()) throw DomainError("mixture needs at least one atom");
  double total = 0.0;
  for (const auto& atom : atoms) {
    if (!(atom.v1 >= 0.0) || !(atom.v2 >= 0.0) || !std::isfinite(atom.v1) ||
        !std::isfinite(atom.v2)) {
      throw DomainError("mixture atom locations must be finite and nonnegative");
    }
    check_positive(atom.weight, "mixture weight");
    total += atom.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("mixture weights must sum to 1");
}

void check_base(const BaseCorrelation& base) {
  check_positive(base.scale, "base correlation scale");
  if (!(base.alpha > 0.0 && base.alpha <= 2.0)) {
    throw DomainError("base correlation exponent must lie in (0,2]");
  }
  if (base.family == BaseFamily::Cauchy) check_positive(base.beta, "Cauchy beta");
}

void validate(const GneitingModel& m) {
  check_dim(m.dim);
  if (!(m.a >= 0.0) || !std::isfinite(m.a)) throw DomainError("Gneiting a must be >= 0");
  check_positive(m.b, "Gneiting b");
  check_positive(m.nu, "Gneiting nu");
  check_unit_interval(m.gamma, "Gneiting gamma");
  check_unit_interval(m.beta1, "Gneiting beta1");
  check_unit_interval(m.beta2, "Gneiting beta2");
}

void validate(const SeparableModel& m) {
  check_dim(m.dim);
  check_positive(m.range_c, "separable C");
  check_positive(m.lambda, "separable lambda");
}

void validate(const MaMixtureModel& m) {
  check_dim(m.dim);
  check_atoms(m.atoms);
  check_base(m.spatial);
  check_base(m.temporal);
}

void validate(const BernsteinFunction& f) {
  check_positive(f.c, "Bernstein c");
  check_unit_interval(f.alpha, "Bernstein alpha");
}

void validate(const BernsteinModel& m) {
  check_dim(static_cast<int>(m.axes.size()));
  for (const auto& f : m.axes) validate(f);
  validate(m.time);
  check_atoms(m.atoms);
}

int dim_of(const ModelFamily& family) {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BernsteinModel>) {
          return static_cast<int>(m.axes.size());
        } else {
          return m.dim;
        }
      },
      family);
}

// log ρ for the Gneiting power family.
double gneiting_log_rho(const GneitingModel& m, double hnorm, double u) {
  const double y = std::pow(std::abs(u), 2.0 * m.beta2);
  const double log_psi = m.gamma * std::log1p(m.a * y);
  const double x = std::pow(hnorm, 2.0 * m.beta1) * std::exp(-log_psi);
  return -0.5 * m.dim * log_psi - m.nu * std::log1p(m.b * x);
}

// exponent -v1 Σψ_i(|h_i|) - v2 ψ_t(|u|) with the ψ(0) = 1 parts removed;
// the removed constant is absorbed by the tilted weights.
double bernstein_excess(const BernsteinModel& m, const SpaceTimeLag& lag, double v1, double v2) {
  double spatial = 0.0;
  for (std::size_t i = 0; i < m.axes.size(); ++i) {
    spatial += m.axes[i](std::abs(lag.h[i])) - 1.0;
  }
  return v1 * spatial + v2 * (m.time(std::abs(lag.u)) - 1.0);
}

std::vector<double> bernstein_tilted_weights(const BernsteinModel& m) {
  const double d = static_cast<double>(m.axes.size());
  std::vector<double> w;
  w.reserve(m.atoms.size());
  for (const auto& atom : m.atoms) {
    w.push_back(atom.weight * std::exp(-d * atom.v1 - atom.v2));
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lags and points

SpaceTimeLag::SpaceTimeLag(std::span<const double> spatial, double temporal)
    : dim(static_cast<int>(spatial.size())), u(temporal) {
  check_dim(dim);
  std::copy(spatial.begin(), spatial.end(), h.begin());
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(h[i])) throw DomainError("lag components must be finite");
  }
  if (!std::isfinite(u)) throw DomainError("lag components must be finite");
}

SpaceTimeLag::SpaceTimeLag(std::initializer_list<double> spatial, double temporal)
    : SpaceTimeLag(std::span<const double>(spatial.begin(), spatial.size()), temporal) {}

double SpaceTimeLag::spatial_norm() const noexcept {
  double sum = 0.0;
  for (int i = 0; i < dim; ++i) sum += h[i] * h[i];
  return std::sqrt(sum);
}

SpaceTimeLag SpaceTimeLag::negated() const noexcept { return scaled(-1.0, -1.0); }

SpaceTimeLag SpaceTimeLag::scaled(double s, double t) const noexcept {
  SpaceTimeLag out = *this;
  for (int i = 0; i < dim; ++i) out.h[i] *= s;
  out.u *= t;
  return out;
}

SpaceTimePoint::SpaceTimePoint(std::initializer_list<double> spatial, double time)
    : dim(static_cast<int>(spatial.size())), t(time) {
  check_dim(dim);
  std::copy(spatial.begin(), spatial.end(), s.begin());
}

SpaceTimeLag SpaceTimePoint::operator-(const SpaceTimePoint& other) const {
  if (dim != other.dim) throw DomainError("space-time points differ in dimension");
  SpaceTimeLag lag;
  lag.dim = dim;
  for (int i = 0; i < dim; ++i) lag.h[i] = s[i] - other.s[i];
  lag.u = t - other.t;
  return lag;
}

SpaceTimeLag SpaceTimePoint::as_lag() const {
  SpaceTimeLag lag;
  lag.dim = dim;
  lag.h = s;
  lag.u = t;
  return lag;
}

// ---------------------------------------------------------------------------
// Building blocks

double BaseCorrelation::operator()(double r) const noexcept {
  const double x = std::pow(r / scale, alpha);
  if (family == BaseFamily::PoweredExponential) return std::exp(-x);
  return std::exp(-beta * std::log1p(x));
}

double BaseCorrelation::one_minus(double r) const noexcept {
  const double x = std::pow(r / scale, alpha);
  if (family == BaseFamily::PoweredExponential) return -std::expm1(-x);
  return -std::expm1(-beta * std::log1p(x));
}

double BaseCorrelation::leading_constant() const noexcept {
  const double c = std::pow(scale, -alpha);
  return family == BaseFamily::PoweredExponential ? c : beta * c;
}

double BernsteinFunction::operator()(double x) const noexcept {
  return 1.0 + c * std::pow(x, alpha);
}

AnisotropyTransform::AnisotropyTransform(double a_max, double a_min, double angle_radians)
    : a_max_(a_max), a_min_(a_min), angle_(angle_radians) {
  check_positive(a_min, "anisotropy a_min");
  check_positive(a_max, "anisotropy a_max");
  if (a_max < a_min) throw DomainError("anisotropy requires a_max >= a_min");
  if (!std::isfinite(angle_radians)) throw DomainError("anisotropy angle must be finite");
  Eigen::Matrix2d rotation;
  rotation << std::cos(angle_radians), -std::sin(angle_radians),
      std::sin(angle_radians), std::cos(angle_radians);
  const Eigen::Matrix2d scaling = Eigen::Vector2d(1.0 / a_max, 1.0 / a_min).asDiagonal();
  matrix_ = scaling * rotation;
}

SpaceTimeLag AnisotropyTransform::apply(const SpaceTimeLag& lag) const {
  if (lag.dim != 2) throw DomainError("geometric anisotropy is defined for d = 2 only");
  const Eigen::Vector2d v = matrix_ * Eigen::Vector2d(lag.h[0], lag.h[1]);
  SpaceTimeLag out = lag;
  out.h[0] = v[0];
  out.h[1] = v[1];
  return out;
}

Eigen::Vector2d apply_anisotropy(const AnisotropyTransform& t, const Eigen::Vector2d& h) {
  return t.apply(h);
}

// ---------------------------------------------------------------------------
// Expansion

void SmoothnessExpansion::validate() const {
  if (!(alpha1 > 0.0 && alpha1 <= 2.0) || !(alpha2 > 0.0 && alpha2 <= 2.0)) {
    throw DomainError("expansion exponents must lie in (0,2]");
  }
  if (!(c1 >= 0.0) || !(c2 >= 0.0) || !std::isfinite(c1) || !std::isfinite(c2)) {
    throw DomainError("expansion constants must be finite and nonnegative");
  }
  if (c1 == 0.0 && c2 == 0.0) throw DomainError("expansion needs C1 > 0 or C2 > 0");
  for (double w : axis_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("axis weights must be >= 0");
  }
}

double SmoothnessExpansion::spatial_term(const SpaceTimeLag& lag) const {
  if (axis_weights.empty()) return c1 * std::pow(lag.spatial_norm(), alpha1);
  if (static_cast<int>(axis_weights.size()) != lag.dim) {
    throw DomainError("lag dimension does not match the axis-wise expansion");
  }
  double sum = 0.0;
  for (int i = 0; i < lag.dim; ++i) sum += axis_weights[i] * std::pow(std::abs(lag.h[i]), alpha1);
  return c1 * sum;
}

double SmoothnessExpansion::temporal_term(double u) const noexcept {
  return c2 * std::pow(std::abs(u), alpha2);
}

// ---------------------------------------------------------------------------
// CorrelationModel

CorrelationModel::CorrelationModel(ModelFamily family, std::optional<AnisotropyTransform> anisotropy)
    : family_(std::move(family)), anisotropy_(std::move(anisotropy)), dim_(dim_of(family_)) {
  std::visit([](const auto& m) { validate(m); }, family_);
  if (anisotropy_ && dim_ != 2) {
    throw DomainError("geometric anisotropy is defined for d = 2 only");
  }
  if (const auto* m = std::get_if<BernsteinModel>(&family_)) {
    tilted_weights_ = bernstein_tilted_weights(*m);
  }
}

std::string CorrelationModel::family_name() const {
  static constexpr const char* names[] = {"gneiting", "separable", "ma_mixture", "bernstein"};
  return names[family_.index()];
}

SpaceTimeLag CorrelationModel::prepare(const SpaceTimeLag& lag) const {
  if (lag.dim != dim_) {
    std::ostringstream msg;
    msg << "lag dimension " << lag.dim << " does not match model dimension " << dim_;
    throw DomainError(msg.str());
  }
  return anisotropy_ ? anisotropy_->apply(lag) : lag;
}

double CorrelationModel::correlation(const SpaceTimeLag& raw) const {
  const SpaceTimeLag lag = prepare(raw);
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GneitingModel>) {
          return std::exp(gneiting_log_rho(m, lag.spatial_norm(), lag.u));
        } else if constexpr (std::is_same_v<T, SeparableModel>) {
          const double r = lag.spatial_norm();
          return std::exp(-r * r / m.range_c - m.lambda * std::abs(lag.u));
        } else if constexpr (std::is_same_v<T, MaMixtureModel>) {
          const double r = lag.spatial_norm();
          const double t = std::abs(lag.u);
          double sum = 0.0;
          for (const auto& atom : m.atoms) {
            sum += atom.weight * m.spatial(r * atom.v1) * m.temporal(t * atom.v2);
          }
          return sum;
        } else {
          const auto& w = tilted_weights_;
          double sum = 0.0;
          for (std::size_t k = 0; k < m.atoms.size(); ++k) {
            sum += w[k] * std::exp(-bernstein_excess(m, lag, m.atoms[k].v1, m.atoms[k].v2));
          }
          return sum;
        }
      },
      family_);
}

double CorrelationModel::one_minus_correlation(const SpaceTimeLag& raw) const {
  const SpaceTimeLag lag = prepare(raw);
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GneitingModel>) {
          return -std::expm1(gneiting_log_rho(m, lag.spatial_norm(), lag.u));
        } else if constexpr (std::is_same_v<T, SeparableModel>) {
          const double r = lag.spatial_norm();
          return -std::expm1(-r * r / m.range_c - m.lambda * std::abs(lag.u));
        } else if constexpr (std::is_same_v<T, MaMixtureModel>) {
          const double r = lag.spatial_norm();
          const double t = std::abs(lag.u);
          double sum = 0.0;
          for (const auto& atom : m.atoms) {
            const double p = m.spatial.one_minus(r * atom.v1);
            const double q = m.temporal.one_minus(t * atom.v2);
            sum += atom.weight * (p + q - p * q);
          }
          return sum;
        } else {
          const auto& w = tilted_weights_;
          double sum = 0.0;
          for (std::size_t k = 0; k < m.atoms.size(); ++k) {
            sum += w[k] * -std::expm1(-bernstein_excess(m, lag, m.atoms[k].v1, m.atoms[k].v2));
          }
          return sum;
        }
      },
      family_);
}

double correlation(const CorrelationModel& model, const SpaceTimeLag& lag) {
  return model.correlation(lag);
}

SmoothnessExpansion expansion(const CorrelationModel& model) {
  SmoothnessExpansion out = std::visit(
      [](const auto& m) -> SmoothnessExpansion {
        using T = std::decay_t<decltype(m)>;
        SmoothnessExpansion e;
        if constexpr (std::is_same_v<T, GneitingModel>) {
          // ψ(0) = 1 and F_φ is a gamma law with mean bν.
          const double psi_prime = m.a * m.gamma;
          if (psi_prime == 0.0) {
            throw UnsupportedModelError(
                "Gneiting model with psi'(0) = 0 has no space-time limit expansion");
          }
          e.alpha1 = 2.0 * m.beta1;
          e.alpha2 = 2.0 * m.beta2;
          e.c1 = m.b * m.nu;
          e.c2 = 0.5 * m.dim * psi_prime;
        } else if constexpr (std::is_same_v<T, SeparableModel>) {
          e.alpha1 = 2.0;
          e.alpha2 = 1.0;
          e.c1 = 1.0 / m.range_c;
          e.c2 = m.lambda;
        } else if constexpr (std::is_same_v<T, MaMixtureModel>) {
          e.alpha1 = m.spatial.alpha;
          e.alpha2 = m.temporal.alpha;
          double moment1 = 0.0;
          double moment2 = 0.0;
          for (const auto& atom : m.atoms) {
            moment1 += atom.weight * std::pow(atom.v1, e.alpha1);
            moment2 += atom.weight * std::pow(atom.v2, e.alpha2);
          }
          e.c1 = m.spatial.leading_constant() * moment1;
          e.c2 = m.temporal.leading_constant() * moment2;
        } else {
          // Direct Taylor expansion of exp(-v1 Σ c_i|h_i|^α_i - v2 c_t|u|^α_t)
          // under the weights tilted by exp(-d v1 - v2). Axes with a larger
          // exponent than the smallest one vanish under the log n scaling.
          const auto w = bernstein_tilted_weights(m);
          double m1 = 0.0;
          double m2 = 0.0;
          for (std::size_t k = 0; k < m.atoms.size(); ++k) {
            m1 += w[k] * m.atoms[k].v1;
            m2 += w[k] * m.atoms[k].v2;
          }
          double alpha_min = 2.0;
          for (const auto& f : m.axes) alpha_min = std::min(alpha_min, f.alpha);
          e.alpha1 = alpha_min;
          for (const auto& f : m.axes) e.axis_weights.push_back(f.alpha == alpha_min ? f.c : 0.0);
          e.c1 = m1;
          e.alpha2 = m.time.alpha;
          e.c2 = m2 * m.time.c;
        }
        return e;
      },
      model.family());
  out.validate();
  return out;
}

double delta(const SmoothnessExpansion& exp, const SpaceTimeLag& lag,
             const std::optional<AnisotropyTransform>& aniso) {
  const SpaceTimeLag effective = aniso ? aniso->apply(lag) : lag;
  return exp.spatial_term(effective) + exp.temporal_term(effective.u);
}

double limit_delta(const CorrelationModel& model, const SpaceTimeLag& lag) {
  return delta(expansion(model), lag, model.anisotropy());
}

ScalingSequences scaling_sequences_from_log(const SmoothnessExpansion& exp, double log_n) {
  if (!(log_n > 0.0) || !std::isfinite(log_n)) throw DomainError("log n must be positive");
  return {std::pow(log_n, -1.0 / exp.alpha1), std::pow(log_n, -1.0 / exp.alpha2)};
}

ScalingSequences scaling_sequences(const SmoothnessExpansion& exp, long long n) {
  if (n < 2) throw DomainError("scaling sequences need n >= 2");
  return scaling_sequences_from_log(exp, std::log(static_cast<double>(n)));
}

double variogram_to_covariance(const SmoothnessExpansion& exp, const SpaceTimePoint& p1,
                               const SpaceTimePoint& p2,
                               const std::optional<AnisotropyTransform>& aniso) {
  return delta(exp, p1.as_lag(), aniso) + delta(exp, p2.as_lag(), aniso) -
         delta(exp, p1 - p2, aniso);
}

}  // namespace stmax
