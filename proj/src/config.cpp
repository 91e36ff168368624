#include "stmax/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace stmax {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxDenseGridPoints = 12000;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

json gneiting_defaults() {
  const GneitingModel m;
  return {{"family", "gneiting"}, {"a", m.a},         {"b", m.b},        {"nu", m.nu},
          {"gamma", m.gamma},     {"beta1", m.beta1}, {"beta2", m.beta2}};
}

json base_defaults() {
  return {{"family", "powered_exponential"}, {"scale", 1.0}, {"alpha", 2.0}, {"beta", 1.0}};
}

json atom_list_default() { return json::array({{{"v1", 1.0}, {"v2", 1.0}, {"weight", 1.0}}}); }

json model_defaults(const std::string& family) {
  if (family == "gneiting") return gneiting_defaults();
  if (family == "separable") return {{"family", family}, {"range_c", 1.0}, {"lambda", 1.0}};
  if (family == "ma_mixture") {
    return {{"family", family},
            {"spatial", base_defaults()},
            {"temporal", base_defaults()},
            {"atoms", atom_list_default()}};
  }
  if (family == "bernstein") {
    const json axis = {{"c", 1.0}, {"alpha", 1.0}};
    return {{"family", family},
            {"axes", json::array({axis, axis})},
            {"time", axis},
            {"atoms", atom_list_default()}};
  }
  throw ConfigError("model.family", "unknown model family '" + family +
                                        "' (expected gneiting, separable, ma_mixture or bernstein)");
}

json anisotropy_defaults() {
  const AnisotropySpec a;
  return {{"a_max", a.a_max}, {"a_min", a.a_min}, {"angle_deg", a.angle_deg}};
}

// Overlays `user` onto `base`, rejecting keys that `base` does not know.
void overlay(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, value] : user.items()) {
    const std::string where = join(path, key);
    if (!base.contains(key)) throw ConfigError(where, "unknown key");
    json& slot = base[key];
    if (slot.is_object()) {
      overlay(slot, value, where);
    } else {
      slot = value;
    }
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) throw ConfigError(path, "must be > 0");
  return v;
}

long long integer(const json& j, const std::string& path, long long lo, long long hi) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(hi)) {
    throw ConfigError(path, "must be <= " + std::to_string(hi));
  }
  const long long v = j.get<long long>();
  if (v < lo || v > hi) {
    throw ConfigError(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::array<double, 2> pair_of_numbers(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected an array of 2 numbers");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(join(path, key), "missing");
  return obj.at(key);
}

BaseCorrelation parse_base(const json& j, const std::string& path) {
  json resolved = base_defaults();
  overlay(resolved, j, path);
  BaseCorrelation base;
  const std::string family = text(resolved["family"], path + ".family");
  if (family == "powered_exponential") {
    base.family = BaseFamily::PoweredExponential;
  } else if (family == "cauchy") {
    base.family = BaseFamily::Cauchy;
  } else {
    throw ConfigError(path + ".family", "expected powered_exponential or cauchy");
  }
  base.scale = number(resolved["scale"], path + ".scale");
  base.alpha = number(resolved["alpha"], path + ".alpha");
  base.beta = number(resolved["beta"], path + ".beta");
  return base;
}

std::vector<MixtureAtom> parse_atoms(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array");
  std::vector<MixtureAtom> atoms;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = path + "[" + std::to_string(i) + "]";
    json resolved = {{"v1", 1.0}, {"v2", 1.0}, {"weight", 1.0}};
    overlay(resolved, j[i], where);
    atoms.push_back({number(resolved["v1"], where + ".v1"), number(resolved["v2"], where + ".v2"),
                     number(resolved["weight"], where + ".weight")});
  }
  return atoms;
}

BernsteinFunction parse_bernstein(const json& j, const std::string& path) {
  json resolved = {{"c", 1.0}, {"alpha", 1.0}};
  overlay(resolved, j, path);
  return {number(resolved["c"], path + ".c"), number(resolved["alpha"], path + ".alpha")};
}

ModelFamily parse_family(const json& m) {
  const std::string family = m["family"].get<std::string>();
  if (family == "gneiting") {
    GneitingModel g;
    g.a = number(m["a"], "model.a");
    g.b = number(m["b"], "model.b");
    g.nu = number(m["nu"], "model.nu");
    g.gamma = number(m["gamma"], "model.gamma");
    g.beta1 = number(m["beta1"], "model.beta1");
    g.beta2 = number(m["beta2"], "model.beta2");
    g.dim = 2;
    return g;
  }
  if (family == "separable") {
    return SeparableModel{number(m["range_c"], "model.range_c"), number(m["lambda"], "model.lambda"), 2};
  }
  if (family == "ma_mixture") {
    MaMixtureModel mix;
    mix.spatial = parse_base(m["spatial"], "model.spatial");
    mix.temporal = parse_base(m["temporal"], "model.temporal");
    mix.atoms = parse_atoms(m["atoms"], "model.atoms");
    mix.dim = 2;
    return mix;
  }
  BernsteinModel bern;
  const json& axes = m["axes"];
  if (!axes.is_array() || axes.size() != 2) {
    throw ConfigError("model.axes", "expected one Bernstein function per spatial axis (2)");
  }
  for (std::size_t i = 0; i < axes.size(); ++i) {
    bern.axes.push_back(parse_bernstein(axes[i], "model.axes[" + std::to_string(i) + "]"));
  }
  bern.time = parse_bernstein(m["time"], "model.time");
  bern.atoms = parse_atoms(m["atoms"], "model.atoms");
  return bern;
}

Eigen::Matrix2d parse_matrix2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected a 2x2 array");
  Eigen::Matrix2d m;
  for (int r = 0; r < 2; ++r) {
    const auto row = pair_of_numbers(j[r], path + "[" + std::to_string(r) + "]");
    m(r, 0) = row[0];
    m(r, 1) = row[1];
  }
  return m;
}

MarginalKind parse_marginal(const std::string& s) {
  if (s == "frechet") return MarginalKind::Frechet;
  if (s == "gumbel") return MarginalKind::Gumbel;
  if (s == "weibull") return MarginalKind::Weibull;
  throw ConfigError("marginal", "expected frechet, gumbel or weibull");
}

Construction parse_construction(const std::string& s) {
  if (s == "husler_reiss") return Construction::HuslerReiss;
  if (s == "storm") return Construction::Storm;
  throw ConfigError("construction", "expected husler_reiss or storm");
}

}  // namespace

SpaceTimeGrid GridSpec::build() const {
  return SpaceTimeGrid::regular({counts[0], counts[1]}, spacing, {origin[0], origin[1]}, times);
}

AnisotropyTransform AnisotropySpec::transform() const {
  return AnisotropyTransform(a_max, a_min, angle_deg * std::numbers::pi / 180.0);
}

std::string to_string(MarginalKind kind) {
  switch (kind) {
    case MarginalKind::Frechet: return "frechet";
    case MarginalKind::Gumbel: return "gumbel";
    case MarginalKind::Weibull: return "weibull";
  }
  return "frechet";
}

std::string to_string(Construction construction) {
  return construction == Construction::Storm ? "storm" : "husler_reiss";
}

json default_config() {
  const GridSpec grid;
  const SurfaceSpec surf;
  const OutputSpec out;
  const StormModelParams storm;
  return {
      {"construction", "husler_reiss"},
      {"marginal", "frechet"},
      {"n", 100},
      {"realizations", 1},
      {"model", gneiting_defaults()},
      {"anisotropy", nullptr},
      {"storm",
       {{"sigma", nullptr},
        {"sigma3_sq", nullptr},
        {"buffer", storm.buffer},
        {"intensity_floor", storm.intensity_floor}}},
      {"grid",
       {{"counts", grid.counts}, {"spacing", grid.spacing}, {"origin", grid.origin},
        {"times", grid.times}}},
      {"surfaces",
       {{"h_max", surf.h_max},
        {"u_max", surf.u_max},
        {"h_steps", surf.h_steps},
        {"u_steps", surf.u_steps},
        {"extent", surf.extent},
        {"points", surf.points}}},
      {"validation",
       {{"pairs", json::array({{{"s1", {0.0, 0.0}}, {"t1", 0.0}, {"s2", {1.0, 0.0}}, {"t2", 0.0}}})},
        {"thresholds", json::array({{0.5, 0.5}, {1.0, 1.0}, {2.0, 2.0}})},
        {"slack", 0.01}}},
      {"output", {{"dir", out.dir}, {"prefix", out.prefix}}},
  };
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("", "override must look like key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::istringstream parts(key);
  std::string part;
  std::vector<std::string> segments;
  while (std::getline(parts, part, '.')) {
    if (part.empty()) throw ConfigError(key, "empty path segment in override");
    segments.push_back(part);
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const std::string& seg = segments[i];
    const bool last = i + 1 == segments.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(seg);
      } catch (const std::exception&) {
        throw ConfigError(key, "'" + seg + "' is not an array index");
      }
      if (idx >= node->size()) throw ConfigError(key, "array index out of range");
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw ConfigError(key, "cannot descend into a non-object");
      node = &(*node)[seg];
    }
    if (last) *node = value;
  }
}

RunConfig parse_config(const json& user) {
  if (!user.is_object()) throw ConfigError("", "config must be a JSON object");
  RunConfig cfg;
  json resolved = default_config();

  json user_rest = user;
  if (user_rest.contains("seed")) user_rest.erase("seed");
  json user_model = user_rest.contains("model") ? user_rest["model"] : json::object();
  json user_aniso = user_rest.contains("anisotropy") ? user_rest["anisotropy"] : json(nullptr);
  user_rest.erase("model");
  user_rest.erase("anisotropy");
  try {
    overlay(resolved, user_rest, "");

    if (!user_model.is_object()) throw ConfigError("model", "expected an object");
    const std::string family =
        user_model.contains("family") ? text(user_model["family"], "model.family") : "gneiting";
    resolved["model"] = model_defaults(family);
    overlay(resolved["model"], user_model, "model");

    if (!user_aniso.is_null()) {
      resolved["anisotropy"] = anisotropy_defaults();
      overlay(resolved["anisotropy"], user_aniso, "anisotropy");
    }
  } catch (const json::exception& e) {
    throw ConfigError("", e.what());
  }

  if (!user.contains("seed")) {
    throw ConfigError("seed", "a master seed is required (no implicit time-based seed)");
  }
  const json& seed = user["seed"];
  if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<long long>() < 0)) {
    throw ConfigError("seed", "expected a non-negative integer");
  }
  cfg.seed = seed.get<std::uint64_t>();
  resolved["seed"] = cfg.seed;

  cfg.construction = parse_construction(text(resolved["construction"], "construction"));
  cfg.marginal = parse_marginal(text(resolved["marginal"], "marginal"));
  cfg.n = integer(resolved["n"], "n", 2, std::numeric_limits<std::uint32_t>::max());
  cfg.realizations = static_cast<std::uint32_t>(
      integer(resolved["realizations"], "realizations", 1, std::numeric_limits<std::uint32_t>::max()));

  // grid
  const json& g = resolved["grid"];
  if (!g["counts"].is_array() || g["counts"].size() != 2) {
    throw ConfigError("grid.counts", "expected [nx, ny]");
  }
  cfg.grid.counts = {static_cast<int>(integer(g["counts"][0], "grid.counts[0]", 1, 100000)),
                     static_cast<int>(integer(g["counts"][1], "grid.counts[1]", 1, 100000))};
  cfg.grid.spacing = positive(g["spacing"], "grid.spacing");
  cfg.grid.origin = pair_of_numbers(g["origin"], "grid.origin");
  if (!g["times"].is_array() || g["times"].empty()) {
    throw ConfigError("grid.times", "expected a non-empty array of numbers");
  }
  cfg.grid.times.clear();
  std::set<double> seen;
  for (std::size_t i = 0; i < g["times"].size(); ++i) {
    const double t = number(g["times"][i], "grid.times[" + std::to_string(i) + "]");
    if (!seen.insert(t).second) throw ConfigError("grid.times", "time points must be distinct");
    cfg.grid.times.push_back(t);
  }

  // model and anisotropy
  if (!resolved["anisotropy"].is_null()) {
    const json& a = resolved["anisotropy"];
    AnisotropySpec spec;
    spec.a_max = positive(a["a_max"], "anisotropy.a_max");
    spec.a_min = positive(a["a_min"], "anisotropy.a_min");
    spec.angle_deg = number(a["angle_deg"], "anisotropy.angle_deg");
    cfg.anisotropy = spec;
  }
  std::optional<AnisotropyTransform> aniso;
  try {
    if (cfg.anisotropy) aniso = cfg.anisotropy->transform();
    cfg.model = CorrelationModel(parse_family(resolved["model"]), aniso);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(cfg.anisotropy ? "model/anisotropy" : "model", e.what());
  }

  // storm kernel
  const json& s = resolved["storm"];
  cfg.storm.buffer = number(s["buffer"], "storm.buffer");
  cfg.storm.intensity_floor = number(s["intensity_floor"], "storm.intensity_floor");
  if (s["sigma"].is_null() != s["sigma3_sq"].is_null()) {
    throw ConfigError("storm", "give both sigma and sigma3_sq, or neither");
  }
  if (cfg.construction == Construction::Storm) {
    if (cfg.marginal != MarginalKind::Frechet) {
      throw ConfigError("marginal", "the storm construction has Frechet margins");
    }
    try {
      if (s["sigma"].is_null()) {
        const StormModelParams derived = equivalent_storm_params(expansion(cfg.model), aniso);
        cfg.storm.sigma = derived.sigma;
        cfg.storm.sigma3_sq = derived.sigma3_sq;
      } else {
        cfg.storm.sigma = parse_matrix2(s["sigma"], "storm.sigma");
        cfg.storm.sigma3_sq = number(s["sigma3_sq"], "storm.sigma3_sq");
      }
      cfg.storm.validate();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("storm", e.what());
    }
  } else {
    try {
      expansion(cfg.model).validate();
    } catch (const std::exception& e) {
      throw ConfigError("model", std::string("no usable small-lag expansion: ") + e.what());
    }
    const std::size_t points = static_cast<std::size_t>(cfg.grid.counts[0]) *
                               static_cast<std::size_t>(cfg.grid.counts[1]) * cfg.grid.times.size();
    if (points > kMaxDenseGridPoints) {
      throw ConfigError("grid", "husler_reiss needs a dense covariance; at most " +
                                    std::to_string(kMaxDenseGridPoints) + " space-time points");
    }
  }

  // surfaces
  const json& sf = resolved["surfaces"];
  cfg.surfaces.h_max = positive(sf["h_max"], "surfaces.h_max");
  cfg.surfaces.u_max = positive(sf["u_max"], "surfaces.u_max");
  cfg.surfaces.h_steps = static_cast<int>(integer(sf["h_steps"], "surfaces.h_steps", 2, 100000));
  cfg.surfaces.u_steps = static_cast<int>(integer(sf["u_steps"], "surfaces.u_steps", 2, 100000));
  cfg.surfaces.extent = positive(sf["extent"], "surfaces.extent");
  cfg.surfaces.points = static_cast<int>(integer(sf["points"], "surfaces.points", 3, 100000));

  // validation
  const json& v = resolved["validation"];
  if (!v["pairs"].is_array()) throw ConfigError("validation.pairs", "expected an array");
  for (std::size_t i = 0; i < v["pairs"].size(); ++i) {
    const std::string where = "validation.pairs[" + std::to_string(i) + "]";
    json p = {{"s1", {0.0, 0.0}}, {"t1", 0.0}, {"s2", {0.0, 0.0}}, {"t2", 0.0}};
    overlay(p, v["pairs"][i], where);
    cfg.validation.pairs.push_back({pair_of_numbers(p["s1"], where + ".s1"),
                                    number(p["t1"], where + ".t1"),
                                    pair_of_numbers(p["s2"], where + ".s2"),
                                    number(p["t2"], where + ".t2")});
  }
  if (!v["thresholds"].is_array()) throw ConfigError("validation.thresholds", "expected an array");
  for (std::size_t i = 0; i < v["thresholds"].size(); ++i) {
    const std::string where = "validation.thresholds[" + std::to_string(i) + "]";
    const auto y = pair_of_numbers(v["thresholds"][i], where);
    try {
      to_frechet_scale(y[0], cfg.marginal);
      to_frechet_scale(y[1], cfg.marginal);
    } catch (const DomainError& e) {
      throw ConfigError(where, e.what());
    }
    cfg.validation.thresholds.push_back(y);
  }
  cfg.validation.slack = number(v["slack"], "validation.slack");
  if (cfg.validation.slack < 0.0) throw ConfigError("validation.slack", "must be >= 0");

  // output
  cfg.output.dir = text(resolved["output"]["dir"], "output.dir");
  cfg.output.prefix = text(resolved["output"]["prefix"], "output.prefix");
  if (cfg.output.prefix.empty()) throw ConfigError("output.prefix", "must not be empty");

  cfg.resolved = std::move(resolved);
  return cfg;
}

}  // namespace stmax
