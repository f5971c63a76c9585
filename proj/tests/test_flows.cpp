#include <doctest.h>

#include <cmath>

#include "flexsim/flows.hpp"
#include "test_support.hpp"

using namespace flexsim;
namespace t = flexsim::testing;

namespace {

const std::string kTag = "logistic:2+1";

FlexPool make_pool(std::size_t n_clients, std::size_t n_samples = 300, std::uint64_t seed = 0) {
  auto src = generate_blobs(n_samples, 2, 2, 4.0, seed);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n_clients; ++i) ids.push_back("c" + std::to_string(i));
  auto fed = from_config(src, FedDatasetConfig{.seed = seed, .n_nodes = n_clients, .node_ids = ids});
  return FlexPool::create(std::move(fed), client_server_architecture(ids, "server"));
}

LearnerSpec logistic() { return {.kind = LearnerKind::LogisticRegression, .n_features = 2, .lr = 0.1, .epochs = 1}; }

}  // namespace

TEST_CASE("deploy copies the server params into every client") {
  auto pool = make_pool(3);
  auto servers = pool.servers();
  auto clients = pool.clients();
  pool.model("server").set(keys::kParams, ParamVector{{1, 2, 3}, kTag});
  deploy_server_model(servers, clients);
  for (const auto& id : clients.actor_ids())
    CHECK(pool.model(id).get<ParamVector>(keys::kParams).values == std::vector<double>{1, 2, 3});

  pool.model("server").get<ParamVector>(keys::kParams).values[0] = 100;
  CHECK(pool.model("c0").get<ParamVector>(keys::kParams).values[0] == 1);
}

TEST_CASE("deploy errors") {
  auto pool = make_pool(2);
  auto servers = pool.servers();
  auto clients = pool.clients();
  CHECK(t::error_code([&] { deploy_server_model(servers, clients); }) == ErrorCode::MissingKey);

  auto p2p = FlexPool::create({}, p2p_architecture({"a", "b"}));
  auto two = p2p.servers();
  auto all = p2p.clients();
  CHECK(t::error_code([&] { deploy_server_model(two, all); }) == ErrorCode::MultipleServers);
}

TEST_CASE("train_clients trains, keeps empty clients and is deterministic") {
  auto src = generate_blobs(100, 2, 2, 4.0, 1);
  FedDataset fed;
  fed.emplace("a", src);
  fed.emplace("b", src);
  fed.emplace("e", src.select_rows(std::vector<std::size_t>{}));
  auto pool = FlexPool::create(std::move(fed), client_server_architecture({"a", "b", "e"}));
  auto spec = logistic();
  pool.clients().map([&](FlexModel& m, const Dataset*) { m.set(keys::kParams, init_params(spec)); });
  auto clients = pool.clients();
  auto outcome = train_clients(clients, spec);
  CHECK(outcome.trained_ids == std::vector<std::string>{"a", "b"});
  CHECK(outcome.empty_ids == std::vector<std::string>{"e"});
  CHECK(outcome.train_loss.size() == 2);
  CHECK(pool.model("a").get<ParamVector>(keys::kParams) == pool.model("b").get<ParamVector>(keys::kParams));
  CHECK(pool.model("a").get<ParamVector>(keys::kParams) == train(spec, init_params(spec), src));
  CHECK(pool.model("e").get<ParamVector>(keys::kParams) == init_params(spec));

  spec.epochs = 0;
  auto before = pool.model("a").get<ParamVector>(keys::kParams);
  train_clients(clients, spec);
  CHECK(pool.model("a").get<ParamVector>(keys::kParams) == before);
}

TEST_CASE("collect gathers params, ids and sizes in id order") {
  auto pool = make_pool(3, 300);
  for (int i = 0; i < 3; ++i)
    pool.model("c" + std::to_string(i)).set(keys::kParams, ParamVector{{double(i + 1)}, "t"});
  auto servers = pool.servers();
  auto clients = pool.clients();
  collect_client_params(servers, clients);
  const auto& server = pool.model("server");
  const auto& collected = server.get<ParamVectorList>(keys::kCollected);
  REQUIRE(collected.size() == 3);
  CHECK(collected[0].values == std::vector<double>{1});
  CHECK(collected[1].values == std::vector<double>{2});
  CHECK(collected[2].values == std::vector<double>{3});
  CHECK(server.get<TextList>(keys::kCollectedIds) == TextList{"c0", "c1", "c2"});
  CHECK(server.get<IntList>(keys::kCollectedSizes) == IntList{100, 100, 100});

  CHECK(t::error_code([&] { collect_client_params(clients, servers); }) == ErrorCode::PermissionDenied);
}

TEST_CASE("collect errors and empty cohorts") {
  auto pool = make_pool(2);
  pool.model("c0").set(keys::kParams, ParamVector{{1}, "t"});
  auto servers = pool.servers();
  auto clients = pool.clients();
  try {
    collect_client_params(servers, clients);
    FAIL("expected MissingKey");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingKey);
    CHECK(std::string(e.what()).find("'c1'") != std::string::npos);
  }

  auto nobody = pool.select(0, 0);
  collect_client_params(servers, nobody);
  CHECK(pool.model("server").get<ParamVectorList>(keys::kCollected).empty());
  CHECK(t::error_code([&] { aggregate(servers, AggregatorSpec{}); }) == ErrorCode::EmptyCollection);
}

TEST_CASE("set_aggregated_and_evaluate") {
  auto pool = make_pool(1);
  auto spec = logistic();
  pool.model("server").set(keys::kParams, init_params(spec));
  auto test = generate_blobs(200, 2, 2, 4.0, 3);
  CHECK(*set_aggregated_and_evaluate(pool.servers(), spec, test).accuracy == 0.5);
  CHECK(t::error_code([&] { set_aggregated_and_evaluate(pool.servers(), spec, test.without_labels()); }) ==
        ErrorCode::NoLabels);
  auto empty = make_pool(1);
  CHECK(t::error_code([&] { set_aggregated_and_evaluate(empty.servers(), spec, test); }) == ErrorCode::MissingKey);
}

TEST_CASE("converged federated run on separable blobs") {
  auto src = generate_blobs(1000, 2, 2, 10.0, 0);
  auto fed = from_config(src, FedDatasetConfig{.seed = 1, .n_nodes = 4});
  auto pool = FlexPool::create(std::move(fed), client_server_architecture({"0", "1", "2", "3"}));
  auto spec = logistic();
  spec.epochs = 5;
  auto reports = run_rounds(pool, spec, AggregatorSpec{}, 5, 4, 0, src);
  REQUIRE(reports.size() == 5);
  CHECK(*reports.back().server_accuracy >= 0.95);
}

TEST_CASE("run_rounds structure") {
  auto pool = make_pool(5);
  auto test = generate_blobs(100, 2, 2, 4.0, 9);
  auto spec = logistic();

  CHECK(run_rounds(pool, spec, AggregatorSpec{}, 0, 2, 0, test).empty());
  CHECK_FALSE(pool.model("server").contains(keys::kParams));

  auto reports = run_rounds(pool, spec, AggregatorSpec{}, 4, 3, 7, test);
  REQUIRE(reports.size() == 4);
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(reports[r].round_index == r);
    CHECK(reports[r].participating_ids.size() == 3);
    CHECK(reports[r].per_client_train_loss.size() == 3);
    CHECK(std::is_sorted(reports[r].participating_ids.begin(), reports[r].participating_ids.end()));
    CHECK(reports[r].server_accuracy.has_value());
    CHECK(std::isfinite(reports[r].mean_client_loss()));
  }

  auto again = make_pool(5);
  auto repeat = run_rounds(again, spec, AggregatorSpec{}, 4, 3, 7, test);
  CHECK(pool.model("server").get<ParamVector>(keys::kParams) == again.model("server").get<ParamVector>(keys::kParams));
  for (std::size_t r = 0; r < 4; ++r) CHECK(repeat[r].participating_ids == reports[r].participating_ids);

  CHECK(t::error_code([&] { run_rounds(pool, spec, AggregatorSpec{}, 1, 6, 0, test); }) == ErrorCode::SelectionTooLarge);
  CHECK(t::error_code([&] { run_rounds(pool, spec, AggregatorSpec{}, 1, 0, 0, test); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("run_rounds attaches the round index to errors") {
  auto pool = make_pool(2);
  auto spec = logistic();
  auto test = generate_blobs(100, 2, 2, 4.0, 9).without_labels();
  try {
    run_rounds(pool, spec, AggregatorSpec{}, 2, 2, 0, test);
    FAIL("expected NoLabels");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoLabels);
    CHECK(std::string(e.what()).find("round 0") != std::string::npos);
  }
}

TEST_CASE("run_rounds needs exactly one server") {
  auto src = generate_blobs(100, 2, 2, 4.0, 0);
  auto fed = from_config(src, FedDatasetConfig{.n_nodes = 2, .node_ids = std::vector<std::string>{"a", "b"}});
  auto pool = FlexPool::create(std::move(fed), p2p_architecture({"a", "b"}));
  CHECK(t::error_code([&] { run_rounds(pool, logistic(), AggregatorSpec{}, 1, 1, 0, src); }) ==
        ErrorCode::MultipleServers);
}

TEST_CASE("mean_client_loss of an empty report is NaN") {
  CHECK(std::isnan(RoundReport{}.mean_client_loss()));
}
