#include <iostream>

#include <CLI11.hpp>

#include "repairctl/cli.hpp"

int main(int argc, char **argv) {
  namespace cli = repairctl::cli;
  CLI::App app{"Simulation and staged feedback control of repairable two-state systems"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  long seed = 0; // reserved; every solver is deterministic

  for (const char *name : cli::command_names) {
    auto *sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "artifact directory (overrides output_dir)");
    sub->add_option("--seed", seed, "reserved, unused");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return cli::exit_usage;
  }

  cli::RunConfig cfg;
  try {
    cfg = cli::load_config(config_path);
  } catch (const cli::ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::exit_usage;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  return cli::run_command(name, cfg, out_dir.empty() ? cfg.output_dir : std::filesystem::path(out_dir), std::cerr);
}
