// specdamp {analyze|simulate|check} --config <path> [--out <dir>] [--seed <n>]

#include <iostream>

#include <CLI11.hpp>

#include "specdamp/io/commands.hpp"

int main(int argc, char** argv) {
  using namespace specdamp::io;

  CLI::App app{"Spectral analysis of damped second-order systems"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration")->required();
    cmd->add_option_function<std::string>("--out", [&](const std::string& d) { opts.out_dir = d; },
                                          "output directory");
    cmd->add_option("--seed", seed, "seed for the optimizer restarts (overrides config and SPECDAMP_SEED)");
  };
  auto* analyze = app.add_subcommand("analyze", "spectrum, sign types and requested analyses");
  auto* simulate = app.add_subcommand("simulate", "energy trajectory from an initial state");
  auto* check = app.add_subcommand("check", "sufficient conditions; exit 0 iff all requested hold");
  for (auto* cmd : {analyze, simulate, check}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalidInput;
  }

  for (auto* cmd : {analyze, simulate, check})
    if (cmd->count("--seed")) opts.seed = seed;

  if (analyze->parsed()) return run_analyze(opts, std::cout, std::cerr);
  if (simulate->parsed()) return run_simulate(opts, std::cout, std::cerr);
  return run_check(opts, std::cout, std::cerr);
}
