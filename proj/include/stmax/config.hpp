#pragma once

// Run configuration: a JSON document with nested sections. Missing keys take
// defaults, unknown keys are rejected, and every parameter range is checked
// before any computation starts. See README.md for the schema.

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stmax/covmodels.hpp"
#include "stmax/gaussfield.hpp"
#include "stmax/maxstable.hpp"

namespace stmax {

/// Invalid configuration; `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class Construction { HuslerReiss, Storm };

struct GridSpec {
  std::array<int, 2> counts{30, 30};
  double spacing = 1.0;
  std::array<double, 2> origin{0.0, 0.0};
  std::vector<double> times{0.0, 1.0, 2.0, 3.0};

  SpaceTimeGrid build() const;
};

struct AnisotropySpec {
  double a_max = 3.0;
  double a_min = 1.0;
  double angle_deg = 45.0;

  AnisotropyTransform transform() const;
};

struct SurfaceSpec {
  double h_max = 30.0;
  double u_max = 30.0;
  int h_steps = 301;
  int u_steps = 301;
  /// Half-width and resolution of the (h1, h2) grid for anisotropic models.
  double extent = 10.0;
  int points = 201;
};

struct ValidationPair {
  std::array<double, 2> s1{};
  double t1 = 0.0;
  std::array<double, 2> s2{};
  double t2 = 0.0;
};

struct ValidationSpec {
  std::vector<ValidationPair> pairs;
  std::vector<std::array<double, 2>> thresholds;
  double slack = 0.01;
};

struct OutputSpec {
  std::string dir = "out";
  std::string prefix = "field";
};

struct RunConfig {
  /// Fully resolved document (defaults filled in); echoed into sidecars.
  nlohmann::json resolved;

  std::uint64_t seed = 0;
  Construction construction = Construction::HuslerReiss;
  MarginalKind marginal = MarginalKind::Frechet;
  long long n = 100;
  std::uint32_t realizations = 1;
  CorrelationModel model{GneitingModel{}};
  std::optional<AnisotropySpec> anisotropy;
  StormModelParams storm;
  GridSpec grid;
  SurfaceSpec surfaces;
  ValidationSpec validation;
  OutputSpec output;
};

/// Defaults for every section except `seed`, which has none.
nlohmann::json default_config();

/// Reads a JSON file; throws ConfigError on I/O or syntax errors.
nlohmann::json load_config_file(const std::filesystem::path& path);

/// Applies "dotted.key=value" to a document. The value is parsed as JSON
/// and kept as a string when that fails.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Resolves defaults and validates. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& user);

std::string to_string(MarginalKind kind);
std::string to_string(Construction construction);

}  // namespace stmax
