// Batch experiment driver: run, sweep and adversary subcommands.
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "lifelong/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Lifelong learning experiment driver"};
  app.require_subcommand(1);

  std::string config;
  std::string out = ".";
  unsigned jobs = 1;
  bool strict = false;
  std::optional<std::uint64_t> seed_override;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--jobs", jobs, "Concurrent trials")->check(CLI::PositiveNumber);
    sub->add_flag("--strict", strict, "Fail on any violated bound check");
    sub->add_option("--seed-override", seed_override, "Replace the config seed");
  };
  auto* run = app.add_subcommand("run", "Run the configured protocol over all trials");
  auto* sweep = app.add_subcommand("sweep", "Sweep one axis of the config");
  auto* adversary = app.add_subcommand("adversary", "Play the single-feature game and regime streams");
  for (auto* sub : {run, sweep, adversary}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every other parse failure is a usage error
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    lifelong::ExperimentConfig cfg = lifelong::load_config(config);
    if (strict) cfg.strict = true;
    if (seed_override) cfg.stream.seed = *seed_override;
    if (run->parsed()) return lifelong::cmd_run(cfg, out, jobs);
    if (sweep->parsed()) return lifelong::cmd_sweep(cfg, out, jobs);
    return lifelong::cmd_adversary(cfg, out, jobs);
  } catch (const lifelong::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const lifelong::SpecError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const lifelong::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
