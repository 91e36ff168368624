#pragma once

// The three CLI commands as library functions: field simulation, analytic
// dependence surfaces and the Monte-Carlo validation harness.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "stmax/config.hpp"

namespace stmax {

enum ExitCode : int {
  kExitSuccess = 0,
  kExitFailure = 1,
  kExitConfigError = 2,
  kExitNumericalFailure = 3,
  kExitValidationBreach = 4,
};

const char* library_version() noexcept;

/// `workers` changes wall time only, never output bytes.
struct CommandOptions {
  std::size_t workers = 1;
};

/// Writes `<dir>/<prefix>_NNNN.csv` and a `.json` sidecar per realization;
/// returns the CSV paths.
std::vector<std::filesystem::path> simulate(const RunConfig& cfg, const CommandOptions& opts);

struct SurfaceRow {
  double x;  // ‖h‖, or h1 on the anisotropic slice
  double y;  // |u|, or h2
  double rho;
  double chi;
};

struct Surface {
  bool anisotropic = false;
  std::vector<SurfaceRow> rows;

  std::string csv() const;
};

/// Isotropic models: (‖h‖, u) over [0, h_max] × [0, u_max] with h along the
/// first axis. With an anisotropy: (h1, h2) over [-extent, extent]² at u = 0.
Surface compute_surface(const RunConfig& cfg);

struct ValidationRow {
  std::size_t pair;
  ValidationPair sites;
  double y1;
  double y2;
  double empirical;
  double closed_form;
  double abs_diff;
  double half_width;
  bool flagged;
};

/// z_{0.995}, for binomial 99% half-widths.
inline constexpr double kBinomialZ99 = 2.5758293035489004;

/// Empirical joint non-exceedance probabilities against the closed forms,
/// one row per (pair, threshold) in configuration order. Needs >= 1000
/// realizations.
std::vector<ValidationRow> run_validation(const RunConfig& cfg, const CommandOptions& opts);
std::string validation_report_csv(const std::vector<ValidationRow>& rows);

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
int cmd_surfaces(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
int cmd_validate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// Runs `body`, translating library exceptions into exit codes and
/// writing the message to `log`.
int run_guarded(const std::function<int()>& body, std::ostream& log);

}  // namespace stmax
