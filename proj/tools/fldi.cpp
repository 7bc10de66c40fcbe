// fldi <command> --config FILE [--seed N] [--out-dir DIR]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fldi/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Folded linear displacement interferometer source toolkit"};
  app.set_version_flag("--version", FLDI_VERSION);
  app.require_subcommand(1);

  fldi::cli::RunOptions opts;
  std::uint64_t seed = 0;
  std::string model;
  std::string chosen;

  for (const auto& name : fldi::cli::kCommands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out-dir", opts.out_dir, "output directory (created if missing)");
    if (name == "ccr") sub->add_option("--model", model, "ideal, uncoated-solid, gold-solid or silver-hollow");
    sub->callback([&, name, sub] {
      chosen = name;
      if (sub->count("--seed")) opts.seed = seed;
      if (name == "ccr" && sub->count("--model")) opts.ccr_model = model;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fldi::cli::kExitUsage;
  }
  return fldi::cli::run_command(chosen, opts, std::cout, std::cerr);
}
