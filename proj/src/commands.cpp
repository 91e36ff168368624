#include "stmax/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>

#include "stmax/errors.hpp"
#include "stmax/extremal.hpp"
#include "stmax/io.hpp"
#include "stmax/parallel.hpp"

#ifndef STMAX_VERSION
#define STMAX_VERSION "0.0.0"
#endif

namespace stmax {

namespace fs = std::filesystem;
using nlohmann::json;

const char* library_version() noexcept { return STMAX_VERSION; }

namespace {

// Storm realizations are generated this many at a time before being written.
constexpr std::size_t kStormBatch = 64;

std::string padded(std::uint32_t r) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04u", r);
  return buf;
}

fs::path output_path(const RunConfig& cfg, const std::string& suffix) {
  return fs::path(cfg.output.dir) / (cfg.output.prefix + suffix);
}

std::optional<AnisotropyTransform> anisotropy_of(const RunConfig& cfg) {
  if (cfg.anisotropy) return cfg.anisotropy->transform();
  return std::nullopt;
}

fs::path write_realization(const RunConfig& cfg, std::uint32_t r, const FieldSample& field,
                           std::optional<std::size_t> events) {
  const fs::path csv = output_path(cfg, "_" + padded(r) + ".csv");
  write_field_csv(csv, field);
  json meta = {
      {"version", library_version()},
      {"seed", cfg.seed},
      {"realization", r},
      {"construction", to_string(cfg.construction)},
      {"marginal", to_string(cfg.marginal)},
      {"grid_points", field.values.size()},
      {"jitter_used", field.jitter_used},
      {"config", cfg.resolved},
  };
  if (events) meta["events"] = *events;
  fs::path sidecar = csv;
  sidecar.replace_extension(".json");
  write_json_file(sidecar, meta);
  return csv;
}

}  // namespace

std::vector<fs::path> simulate(const RunConfig& cfg, const CommandOptions& opts) {
  auto grid = std::make_shared<const SpaceTimeGrid>(cfg.grid.build());
  std::vector<fs::path> written;
  if (cfg.construction == Construction::HuslerReiss) {
    const HuslerReissSimulator sim(cfg.model, grid, cfg.n);
    for (std::uint32_t r = 0; r < cfg.realizations; ++r) {
      const FieldSample field = sim.realization(cfg.marginal, cfg.seed, r, opts.workers);
      written.push_back(write_realization(cfg, r, field, std::nullopt));
    }
    return written;
  }
  for (std::uint32_t first = 0; first < cfg.realizations;) {
    const std::uint32_t count =
        static_cast<std::uint32_t>(std::min<std::size_t>(kStormBatch, cfg.realizations - first));
    std::vector<FieldSample> fields(count);
    std::vector<std::size_t> events(count);
    parallel_for(count, opts.workers, [&](std::size_t k) {
      std::vector<StormEvent> used;
      fields[k] = simulate_storm_field(cfg.storm, grid, cfg.seed,
                                       first + static_cast<std::uint32_t>(k), &used);
      events[k] = used.size();
    });
    for (std::uint32_t k = 0; k < count; ++k) {
      written.push_back(write_realization(cfg, first + k, fields[k], events[k]));
    }
    first += count;
  }
  return written;
}

std::string Surface::csv() const {
  CsvTable table(anisotropic ? std::vector<std::string>{"h1", "h2", "rho", "chi"}
                             : std::vector<std::string>{"hnorm", "u", "rho", "chi"});
  for (const auto& r : rows) {
    table.add_row({format_double(r.x), format_double(r.y), format_double(r.rho),
                   format_double(r.chi)});
  }
  return table.str();
}

Surface compute_surface(const RunConfig& cfg) {
  Surface surface;
  surface.anisotropic = cfg.anisotropy.has_value();
  const SurfaceSpec& s = cfg.surfaces;
  auto add = [&](double x, double y, const SpaceTimeLag& lag) {
    surface.rows.push_back(
        {x, y, cfg.model.correlation(lag), tail_dependence(limit_delta(cfg.model, lag))});
  };
  if (surface.anisotropic) {
    const int p = s.points;
    for (int i = 0; i < p; ++i) {
      const double h1 = -s.extent + 2.0 * s.extent * i / (p - 1);
      for (int j = 0; j < p; ++j) {
        const double h2 = -s.extent + 2.0 * s.extent * j / (p - 1);
        add(h1, h2, SpaceTimeLag({h1, h2}, 0.0));
      }
    }
    return surface;
  }
  for (int i = 0; i < s.h_steps; ++i) {
    const double h = s.h_max * i / (s.h_steps - 1);
    for (int j = 0; j < s.u_steps; ++j) {
      const double u = s.u_max * j / (s.u_steps - 1);
      add(h, u, SpaceTimeLag({h, 0.0}, u));
    }
  }
  return surface;
}

std::vector<ValidationRow> run_validation(const RunConfig& cfg, const CommandOptions& opts) {
  if (cfg.realizations < 1000) {
    throw ConfigError("realizations", "validation needs at least 1000 realizations");
  }
  const ValidationSpec& spec = cfg.validation;
  if (spec.pairs.empty()) throw ConfigError("validation.pairs", "no site pairs given");
  if (spec.thresholds.empty()) throw ConfigError("validation.thresholds", "no thresholds given");

  // A small product grid holding every site of every pair.
  std::vector<SpaceTimeGrid::Point> space;
  std::vector<double> times;
  auto space_index = [&](const std::array<double, 2>& s) {
    const SpaceTimeGrid::Point p{s[0], s[1], 0.0};
    auto it = std::find(space.begin(), space.end(), p);
    if (it == space.end()) {
      space.push_back(p);
      return space.size() - 1;
    }
    return static_cast<std::size_t>(it - space.begin());
  };
  auto time_index = [&](double t) {
    auto it = std::find(times.begin(), times.end(), t);
    if (it == times.end()) {
      times.push_back(t);
      return times.size() - 1;
    }
    return static_cast<std::size_t>(it - times.begin());
  };
  std::vector<std::array<std::size_t, 4>> where;  // space1, time1, space2, time2
  for (const auto& p : spec.pairs) {
    where.push_back({space_index(p.s1), time_index(p.t1), space_index(p.s2), time_index(p.t2)});
  }
  auto grid = std::make_shared<const SpaceTimeGrid>(2, space, times);

  const std::uint32_t count = cfg.realizations;
  std::vector<std::vector<double>> values(count);
  if (cfg.construction == Construction::HuslerReiss) {
    const HuslerReissSimulator sim(cfg.model, grid, cfg.n);
    parallel_for(count, opts.workers, [&](std::size_t r) {
      values[r] = sim.realization(cfg.marginal, cfg.seed, static_cast<std::uint32_t>(r), 1).values;
    });
  } else {
    parallel_for(count, opts.workers, [&](std::size_t r) {
      values[r] =
          simulate_storm_field(cfg.storm, grid, cfg.seed, static_cast<std::uint32_t>(r)).values;
    });
  }

  std::vector<ValidationRow> rows;
  const double n = static_cast<double>(count);
  for (std::size_t k = 0; k < spec.pairs.size(); ++k) {
    const ValidationPair& p = spec.pairs[k];
    const std::size_t i1 = grid->index(where[k][0], where[k][1]);
    const std::size_t i2 = grid->index(where[k][2], where[k][3]);
    const Eigen::Vector2d h(p.s2[0] - p.s1[0], p.s2[1] - p.s1[1]);
    const double u = p.t2 - p.t1;
    for (const auto& y : spec.thresholds) {
      std::size_t hits = 0;
      for (const auto& v : values) {
        if (v[i1] <= y[0] && v[i2] <= y[1]) ++hits;
      }
      double closed = 0.0;
      if (cfg.construction == Construction::HuslerReiss) {
        const double d = limit_delta(cfg.model, SpaceTimeLag({h[0], h[1]}, u));
        closed = bivariate_cdf_hr(y[0], y[1], d, cfg.marginal);
      } else {
        closed = bivariate_cdf_smith(BivariatePair(y[0], y[1]), h, u, cfg.storm);
      }
      ValidationRow row{k, p, y[0], y[1], static_cast<double>(hits) / n, closed, 0.0, 0.0, false};
      row.abs_diff = std::abs(row.empirical - row.closed_form);
      row.half_width = kBinomialZ99 * std::sqrt(closed * (1.0 - closed) / n);
      row.flagged = row.abs_diff > row.half_width + spec.slack;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string validation_report_csv(const std::vector<ValidationRow>& rows) {
  CsvTable table({"pair", "s1_x", "s1_y", "t1", "s2_x", "s2_y", "t2", "y1", "y2", "empirical",
                  "closed_form", "abs_diff", "half_width", "flag"});
  for (const auto& r : rows) {
    table.add_row({std::to_string(r.pair), format_double(r.sites.s1[0]),
                   format_double(r.sites.s1[1]), format_double(r.sites.t1),
                   format_double(r.sites.s2[0]), format_double(r.sites.s2[1]),
                   format_double(r.sites.t2), format_double(r.y1), format_double(r.y2),
                   format_double(r.empirical), format_double(r.closed_form),
                   format_double(r.abs_diff), format_double(r.half_width),
                   r.flagged ? "1" : "0"});
  }
  return table.str();
}

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  const auto files = simulate(cfg, opts);
  log << "wrote " << files.size() << " realization(s) to " << cfg.output.dir << "\n";
  return kExitSuccess;
}

int cmd_surfaces(const RunConfig& cfg, const CommandOptions&, std::ostream& log) {
  const Surface surface = compute_surface(cfg);
  const fs::path path = output_path(cfg, "_surface.csv");
  write_text_file(path, surface.csv());
  log << "wrote " << surface.rows.size() << " surface points to " << path.string() << "\n";
  return kExitSuccess;
}

int cmd_validate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  const auto rows = run_validation(cfg, opts);
  const fs::path path = output_path(cfg, "_validation.csv");
  write_text_file(path, validation_report_csv(rows));
  const auto breaches = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.flagged; });
  log << "validation: " << rows.size() << " checks, " << breaches << " breach(es); report "
      << path.string() << "\n";
  return breaches ? kExitValidationBreach : kExitSuccess;
}

int run_guarded(const std::function<int()>& body, std::ostream& log) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const FactorizationError& e) {
    log << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const MatrixError& e) {
    log << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const EstimateError& e) {
    log << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const UnsupportedModelError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DomainError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace stmax
