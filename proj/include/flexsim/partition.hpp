#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flexsim/dataset.hpp"

namespace flexsim {

/// Declarative description of a federated split of one Dataset.
struct FedDatasetConfig {
  std::uint64_t seed = 0;
  std::size_t n_nodes = 1;
  /// Defaults to "0" .. "n_nodes-1".
  std::optional<std::vector<std::string>> node_ids;
  /// Whether a sample may be assigned to more than one node.
  bool replacement = false;
  /// Per-node fraction of all samples.
  std::optional<std::vector<double>> weights;
  /// Row i, column c: fraction of class c's samples given to node i. Columns
  /// follow the ascending order of the source's distinct labels.
  std::optional<std::vector<std::vector<double>>> weights_per_class;
  /// Per-node feature counts; the feature blocks are always pairwise disjoint.
  std::optional<std::vector<std::size_t>> features_per_node;
  /// Defaults to all true.
  std::optional<std::vector<bool>> keep_labels;

  std::vector<std::string> resolved_node_ids() const;

  bool operator==(const FedDatasetConfig&) const = default;
};

/// Node id -> that node's share of the source dataset, iterated in ascending id order.
using FedDataset = std::map<std::string, Dataset>;

/// Throws the first violated constraint of `config` against `source`.
void validate(const FedDatasetConfig& config, const Dataset& source);

FedDataset from_config(const Dataset& source, const FedDatasetConfig& config);

/// Largest-remainder apportionment of `total` units across `weights`.
///
/// Exact shares are total * w_i / max(sum(w), 1); every node gets the floor of
/// its share and the remaining units (up to round(total * min(sum(w), 1)))
/// go to the largest fractional remainders, lower index first on ties.
std::vector<std::size_t> apportion(std::size_t total, std::span<const double> weights);

/// Class-restricted non-IID weights: every node picks `classes_per_node`
/// distinct classes uniformly at random, then each column is normalized to
/// sum to one (columns no node picked stay zero).
std::vector<std::vector<double>> classes_to_weights(std::size_t n_nodes, std::size_t n_classes,
                                                    std::size_t classes_per_node,
                                                    std::uint64_t seed);

}  // namespace flexsim
