// hybridswap command-line front end.
#include <iostream>

#include <CLI11.hpp>

#include "hybridswap/cli.hpp"

int main(int argc, char** argv) {
  namespace hc = hybridswap::cli;
  CLI::App app{"Entanglement swapping simulations: curves, sweeps, tomography and event timing"};
  app.require_subcommand(1);
  bool show_defaults = false;
  app.add_flag("--print-defaults", show_defaults, "print the default config of the subcommand and exit");

  hc::RunOptions opts;
  std::string config_path;
  std::uint64_t seed = 0;
  for (const auto& name : hc::experiments()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "flat JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--set", opts.sets, "override one key, key=value (repeatable)")->allow_extra_args(false);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hc::kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (show_defaults) {
    std::cout << hc::default_config(name) << "\n";
    return hc::kExitOk;
  }
  if (sub->count("--config")) opts.config_path = config_path;
  if (sub->count("--seed")) opts.seed = seed;
  return hc::run(name, opts, std::cerr);
}
