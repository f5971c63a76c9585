#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flexsim/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"flexsim: federated learning simulation runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run an experiment and write metrics.csv, final_params.txt and resolved_config.json");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_path, "Output directory")->required();
  run->add_option("--seed", seed, "Override both the partition seed and the round seed");

  auto* partition = app.add_subcommand("partition", "Partition tools");
  partition->require_subcommand(1);
  auto* inspect = partition->add_subcommand("inspect", "Write per-node, per-class sample counts as CSV");
  inspect->add_option("--config", config_path, "Experiment config (JSON)")->required();
  inspect->add_option("--out", out_path, "Output CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return flexsim::cmd_run(config_path, out_path, seed, std::cerr);
  return flexsim::cmd_partition_inspect(config_path, out_path, std::cerr);
}
