#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "stmax/commands.hpp"
#include "stmax/config.hpp"

namespace {

struct Invocation {
  std::string config_path;
  std::vector<std::string> overrides;
  std::size_t workers = 1;
};

void add_common(CLI::App* cmd, Invocation& inv) {
  cmd->add_option("-c,--config", inv.config_path, "JSON configuration file");
  cmd->add_option("-s,--set", inv.overrides, "Override a key, e.g. --set model.a=0.05")
      ->take_all();
  cmd->add_option("-w,--workers", inv.workers, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
}

stmax::RunConfig resolve(const Invocation& inv) {
  nlohmann::json doc = inv.config_path.empty() ? nlohmann::json::object()
                                               : stmax::load_config_file(inv.config_path);
  for (const auto& o : inv.overrides) stmax::apply_override(doc, o);
  return stmax::parse_config(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis of space-time max-stable random fields"};
  app.set_version_flag("--version", std::string(stmax::library_version()));
  app.require_subcommand(1);

  Invocation inv;
  auto* simulate = app.add_subcommand("simulate", "Simulate max-stable fields to CSV");
  auto* surfaces = app.add_subcommand("surfaces", "Export correlation and tail-dependence grids");
  auto* validate = app.add_subcommand("validate", "Monte-Carlo check against closed forms");
  for (auto* cmd : {simulate, surfaces, validate}) add_common(cmd, inv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : stmax::kExitConfigError;
  }

  const stmax::CommandOptions opts{inv.workers};
  return stmax::run_guarded(
      [&] {
        const stmax::RunConfig cfg = resolve(inv);
        if (*simulate) return stmax::cmd_simulate(cfg, opts, std::cerr);
        if (*surfaces) return stmax::cmd_surfaces(cfg, opts, std::cerr);
        return stmax::cmd_validate(cfg, opts, std::cerr);
      },
      std::cerr);
}
