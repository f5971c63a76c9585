#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "flexsim/param_vector.hpp"

namespace flexsim {

enum class AggregatorKind { FedAvg, WeightedAvg, ClippedAvg, CoordMedian, TrimmedMean };

std::string_view to_string(AggregatorKind kind);
AggregatorKind parse_aggregator_kind(std::string_view name);

struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::FedAvg;
  /// clipped_avg: maximum L2 norm of each client update.
  std::optional<double> clip_norm;
  /// trimmed_mean: fraction of values dropped at each end, in [0, 0.5).
  std::optional<double> trim_fraction;
  /// weighted_avg: explicit per-client weights, in collection order.
  std::optional<std::vector<double>> weights;
  /// weighted_avg: weight each client by its sample count.
  bool size_weighted = false;
  /// weighted_avg without weights: random weights are drawn from (seed, round).
  std::uint64_t seed = 0;

  bool operator==(const AggregatorSpec&) const = default;
};

/// InvalidArgument unless exactly the kind's own fields are set, with valid values.
void validate(const AggregatorSpec& spec);

/// Combines collected client parameters into new server parameters.
///
/// `current` is the server's parameters before aggregation (needed by
/// clipped_avg), `sizes` the per-client sample counts (needed by a
/// size-weighted average) and `round` keys the random weights of an unweighted
/// weighted_avg. Every kind is invariant under permutations of the inputs and
/// returns v exactly when all inputs equal v.
ParamVector aggregate_params(const AggregatorSpec& spec, std::span<const ParamVector> collected,
                             const ParamVector* current = nullptr,
                             std::span<const std::int64_t> sizes = {}, std::uint64_t round = 0);

}  // namespace flexsim
