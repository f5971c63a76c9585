#include "flexsim/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "flexsim/error.hpp"
#include "flexsim/random.hpp"

namespace flexsim {

double RoundReport::mean_client_loss() const {
  if (per_client_train_loss.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = std::accumulate(per_client_train_loss.begin(), per_client_train_loss.end(), 0.0);
  return total / static_cast<double>(per_client_train_loss.size());
}

namespace {

const std::string& single_server(const FlexPool& servers) {
  if (servers.size() != 1) {
    throw Error(ErrorCode::MultipleServers,
                "expected exactly one server, pool has " + std::to_string(servers.size()));
  }
  return servers.actor_ids().front();
}

}  // namespace

void deploy_server_model(FlexPool& servers, FlexPool& clients) {
  single_server(servers);
  std::optional<ParamVector> broadcast;
  servers.map(
      [&](FlexModel& server, std::span<const FlexModel>, std::span<const std::string>) {
        broadcast = server.get<ParamVector>(keys::kParams);
      },
      clients);
  clients.map([&](FlexModel& client, const Dataset*) { client.set(keys::kParams, *broadcast); });
}

TrainOutcome train_clients(FlexPool& clients, const LearnerSpec& spec) {
  validate(spec);
  TrainOutcome outcome;
  clients.map([&](FlexModel& client, const Dataset* data) {
    auto& params = client.get<ParamVector>(keys::kParams);
    if (data == nullptr || data->n_samples() == 0) {
      outcome.empty_ids.push_back(client.owner_id());
      return;
    }
    ParamVector trained = train(spec, params, *data);
    double loss = loss_and_gradient(spec, trained, *data).loss;
    params = std::move(trained);
    outcome.trained_ids.push_back(client.owner_id());
    outcome.train_loss.push_back(loss);
  });
  return outcome;
}

void collect_client_params(FlexPool& servers, FlexPool& clients) {
  clients.map([](FlexModel& client, const Dataset* data) {
    client.set(keys::kSampleCount, static_cast<std::int64_t>(data ? data->n_samples() : 0));
  });
  servers.map(
      [](FlexModel& server, std::span<const FlexModel> peers, std::span<const std::string> peer_ids) {
        ParamVectorList collected;
        IntList sizes;
        for (const auto& peer : peers) {
          collected.push_back(peer.get<ParamVector>(keys::kParams));
          sizes.push_back(peer.get<std::int64_t>(keys::kSampleCount));
        }
        server.set(keys::kCollected, std::move(collected));
        server.set(keys::kCollectedIds, TextList(peer_ids.begin(), peer_ids.end()));
        server.set(keys::kCollectedSizes, std::move(sizes));
      },
      clients);
}

void aggregate(FlexPool& servers, const AggregatorSpec& agg, std::uint64_t round_index) {
  servers.map([&](FlexModel& server, const Dataset*) {
    const auto& collected = server.get<ParamVectorList>(keys::kCollected);
    std::span<const std::int64_t> sizes;
    if (server.contains(keys::kCollectedSizes)) sizes = server.get<IntList>(keys::kCollectedSizes);
    const ParamVector* current =
        server.contains(keys::kParams) ? &server.get<ParamVector>(keys::kParams) : nullptr;
    ParamVector next = aggregate_params(agg, collected, current, sizes, round_index);
    server.set(keys::kParams, std::move(next));
  });
}

Metrics set_aggregated_and_evaluate(const FlexPool& servers, const LearnerSpec& spec, const Dataset& test) {
  const auto& id = single_server(servers);
  try {
    return evaluate(spec, servers.model(id).get<ParamVector>(keys::kParams), test);
  } catch (const Error& e) {
    throw e.with_context("actor '" + id + "'");
  }
}

std::vector<RoundReport> run_rounds(FlexPool& pool, const RoundConfig& config, const Dataset& test) {
  validate(config.learner);
  validate(config.aggregator);

  FlexPool servers = pool.servers();
  const std::string server_id = single_server(servers);
  if (!servers.roles(server_id).is_aggregator()) {
    throw Error(ErrorCode::InvalidArgument, "server '" + server_id + "' lacks the aggregator role");
  }
  FlexPool clients = pool.select([&](const std::string& id, const RoleSet& roles) {
    return roles.is_client() && id != server_id;
  });
  if (config.clients_per_round == 0) {
    throw Error(ErrorCode::InvalidArgument, "clients_per_round must be at least 1");
  }
  if (config.clients_per_round > clients.size()) {
    throw Error(ErrorCode::SelectionTooLarge, "clients_per_round " + std::to_string(config.clients_per_round) +
                                                  " exceeds the " + std::to_string(clients.size()) +
                                                  " available clients");
  }

  std::vector<RoundReport> reports;
  if (config.rounds == 0) return reports;

  std::set<std::string> attackers;
  bool model_poisoning = false;
  if (config.attack) {
    validate(*config.attack, pool);
    attackers.insert(config.attack->attacker_ids.begin(), config.attack->attacker_ids.end());
    if (config.attack->kind == AttackKind::LabelFlip) {
      poison_data(pool, *config.attack);
    } else {
      model_poisoning = true;
    }
  }

  FlexModel& server_model = pool.model(server_id);
  if (!server_model.contains(keys::kParams)) server_model.set(keys::kParams, init_params(config.learner));

  for (std::size_t r = 0; r < config.rounds; ++r) {
    try {
      FlexPool selected = clients.select(config.clients_per_round, derive_seed(config.round_seed, {r}));
      deploy_server_model(servers, selected);
      const ParamVector deployed = server_model.get<ParamVector>(keys::kParams);
      TrainOutcome outcome = train_clients(selected, config.learner);

      if (model_poisoning) {
        FlexPool active = selected.select(
            [&](const std::string& id, const RoleSet&) { return attackers.contains(id); });
        active.map([&](FlexModel& attacker, const Dataset*) {
          auto& params = attacker.get<ParamVector>(keys::kParams);
          params = poison_update(deployed, params, *config.attack, attacker.owner_id(), r);
        });
      }
      if (config.on_pre_collect) config.on_pre_collect(r, deployed, selected);

      collect_client_params(servers, selected);
      aggregate(servers, config.aggregator, r);
      Metrics metrics = set_aggregated_and_evaluate(servers, config.learner, test);

      RoundReport report;
      report.round_index = r;
      report.participating_ids = selected.actor_ids();
      report.server_loss = metrics.loss;
      report.server_accuracy = metrics.accuracy;
      report.per_client_train_loss = std::move(outcome.train_loss);
      report.empty_client_ids = std::move(outcome.empty_ids);
      reports.push_back(std::move(report));
    } catch (const Error& e) {
      throw e.with_context("round " + std::to_string(r));
    }
  }
  return reports;
}

std::vector<RoundReport> run_rounds(FlexPool& pool, const LearnerSpec& spec, const AggregatorSpec& agg,
                                    std::size_t rounds, std::size_t clients_per_round,
                                    std::uint64_t round_seed, const Dataset& test) {
  RoundConfig config;
  config.learner = spec;
  config.aggregator = agg;
  config.rounds = rounds;
  config.clients_per_round = clients_per_round;
  config.round_seed = round_seed;
  return run_rounds(pool, config, test);
}

}  // namespace flexsim
