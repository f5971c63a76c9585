#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flexsim/actors.hpp"
#include "flexsim/adversary.hpp"
#include "flexsim/aggregation.hpp"
#include "flexsim/dataset.hpp"
#include "flexsim/flows.hpp"
#include "flexsim/learners.hpp"
#include "flexsim/partition.hpp"
#include "flexsim/pool.hpp"

namespace flexsim {

/// Where the centralized data comes from: "blobs" (generate_blobs) or "csv" (load_csv).
struct DatasetSection {
  std::string source = "blobs";
  std::size_t n_samples = 1000;
  std::size_t n_features = 2;
  std::size_t n_classes = 2;
  double class_separation = 5.0;
  std::uint64_t seed = 0;
  /// csv only; relative paths resolve against the config file's directory.
  std::string path;
  std::optional<std::string> label_column;
  bool has_header = true;

  bool operator==(const DatasetSection&) const = default;
};

struct ArchitectureSection {
  /// "client_server" or "p2p".
  std::string kind = "client_server";
  /// client_server only.
  std::string server_id = "server";
  /// Client (or p2p node) ids; default to the partition's node ids.
  std::optional<std::vector<std::string>> node_ids;

  bool operator==(const ArchitectureSection&) const = default;
};

struct LearnerSection {
  LearnerKind kind = LearnerKind::LogisticRegression;
  /// Defaults to the clients' post-partition feature count.
  std::optional<std::size_t> n_features;
  double l2 = 0.0;
  double lr = 0.1;
  std::size_t epochs = 1;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  bool operator==(const LearnerSection&) const = default;
};

struct RunSection {
  std::size_t rounds = 1;
  /// Defaults to every client.
  std::optional<std::size_t> clients_per_round;
  std::uint64_t round_seed = 0;
  /// Fraction of the dataset held out as the server's test set. With 0 the
  /// server evaluates on the full dataset.
  double test_fraction = 0.2;

  bool operator==(const RunSection&) const = default;
};

struct ExperimentConfig {
  DatasetSection dataset;
  FedDatasetConfig partition;
  ArchitectureSection architecture;
  LearnerSection learner;
  AggregatorSpec aggregator;
  std::optional<AttackSpec> attack;
  RunSection run;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses the JSON config format. Unknown sections or keys are a ConfigError.
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Canonical JSON with every default spelled out; parses back to `config`.
std::string dump_experiment_config(const ExperimentConfig& config);

/// Replaces both the partition seed and the round seed.
void apply_seed_override(ExperimentConfig& config, std::uint64_t seed);

/// Dataset source after the train/test split.
struct PreparedData {
  Dataset train;
  Dataset test;
};

PreparedData prepare_data(const ExperimentConfig& config, const std::filesystem::path& base_dir);

/// Everything run_rounds needs, validated.
struct PreparedRun {
  FlexPool pool;
  RoundConfig round;
  Dataset test;
};

PreparedRun prepare_run(const ExperimentConfig& config, const std::filesystem::path& base_dir);

/// Writes metrics rows in the CLI's metrics.csv format (header included).
void write_metrics_csv(const std::vector<RoundReport>& reports, std::ostream& out);
/// shape_tag on the first line, then one real per line.
void write_params(const ParamVector& params, std::ostream& out);

/// Partition summary: one row per (node, class) and one "*" total row per node.
void write_partition_summary(const FedDataset& fed, const Dataset& source, std::ostream& out);

/// `run` subcommand. Returns 0 on success, 2 on invalid input, 1 on runtime failure.
int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            std::optional<std::uint64_t> seed_override, std::ostream& err);

/// `partition inspect` subcommand, same exit codes as cmd_run.
int cmd_partition_inspect(const std::filesystem::path& config_path, const std::filesystem::path& out_path,
                          std::ostream& err);

}  // namespace flexsim
