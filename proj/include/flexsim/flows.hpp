#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flexsim/adversary.hpp"
#include "flexsim/aggregation.hpp"
#include "flexsim/learners.hpp"
#include "flexsim/pool.hpp"

namespace flexsim {

/// Model keys used by the round steps.
namespace keys {
inline constexpr const char* kParams = "params";
inline constexpr const char* kCollected = "collected";
inline constexpr const char* kCollectedIds = "collected_ids";
inline constexpr const char* kCollectedSizes = "collected_sizes";
inline constexpr const char* kSampleCount = "n_samples";
}  // namespace keys

struct RoundReport {
  std::size_t round_index = 0;
  std::vector<std::string> participating_ids;
  double server_loss = 0.0;
  std::optional<double> server_accuracy;
  /// Post-training loss of each participant that trained, in id order.
  std::vector<double> per_client_train_loss;
  /// Participants that held no samples and kept the deployed parameters.
  std::vector<std::string> empty_client_ids;

  /// NaN when no participant trained.
  double mean_client_loss() const;
};

/// Copies the single server's "params" into every client model. The server
/// initiates (so server -> client permission is checked); each client then
/// copies from a read-only broadcast snapshot.
void deploy_server_model(FlexPool& servers, FlexPool& clients);

struct TrainOutcome {
  std::vector<std::string> trained_ids;
  std::vector<double> train_loss;
  std::vector<std::string> empty_ids;
};

/// Local training on each client's own data. Clients without samples keep
/// their parameters and are reported in `empty_ids`.
TrainOutcome train_clients(FlexPool& clients, const LearnerSpec& spec);

/// Each client publishes its sample count, then the server gathers every
/// client's "params" into "collected" (with "collected_ids" and
/// "collected_sizes"), ordered by client id.
void collect_client_params(FlexPool& servers, FlexPool& clients);

/// Replaces each server's "params" with the aggregate of its "collected".
void aggregate(FlexPool& servers, const AggregatorSpec& agg, std::uint64_t round_index = 0);

/// Evaluates the single server's "params" on `test`.
Metrics set_aggregated_and_evaluate(const FlexPool& servers, const LearnerSpec& spec, const Dataset& test);

/// Called once per round after local training (and any model poisoning),
/// before collection: (round index, deployed server params, participants).
using PreCollectHook = std::function<void(std::size_t round, const ParamVector& deployed, const FlexPool& participants)>;

struct RoundConfig {
  LearnerSpec learner;
  AggregatorSpec aggregator;
  std::size_t rounds = 1;
  std::size_t clients_per_round = 1;
  std::uint64_t round_seed = 0;
  std::optional<AttackSpec> attack;
  PreCollectHook on_pre_collect;
};

/// Full client-server rounds: sample clients, deploy, train, (poison),
/// collect, aggregate, evaluate. The pool must hold exactly one server; its
/// "params" are initialized from the learner when absent.
std::vector<RoundReport> run_rounds(FlexPool& pool, const RoundConfig& config, const Dataset& test);

std::vector<RoundReport> run_rounds(FlexPool& pool, const LearnerSpec& spec, const AggregatorSpec& agg,
                                    std::size_t rounds, std::size_t clients_per_round,
                                    std::uint64_t round_seed, const Dataset& test);

}  // namespace flexsim
