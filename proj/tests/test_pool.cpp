#include <doctest.h>

#include <string>
#include <vector>

#include "flexsim/pool.hpp"
#include "test_support.hpp"

using namespace flexsim;
namespace t = flexsim::testing;

namespace {

FlexPool three_client_pool(const ModelInitializer& init = {}) {
  auto src = generate_blobs(90, 2, 2, 3.0, 0);
  auto fed = from_config(src, FedDatasetConfig{.n_nodes = 3});
  return FlexPool::create(std::move(fed), client_server_architecture({"0", "1", "2"}, "server"), init);
}

ModelEntries counter_init(const std::string&, const RoleSet&) {
  return {{"count", std::int64_t{0}}};
}

const RemoteFn kNoop = [](FlexModel&, std::span<const FlexModel>, std::span<const std::string>) {};

}  // namespace

TEST_CASE("pool construction") {
  auto pool = three_client_pool();
  CHECK(pool.size() == 4);
  CHECK(pool.actor_ids() == std::vector<std::string>{"0", "1", "2", "server"});
  CHECK(pool.data("server") == nullptr);
  CHECK(pool.data("1") != nullptr);
  CHECK(pool.data("1")->n_samples() == 30);
  for (const auto& id : pool.actor_ids()) {
    CHECK(pool.model(id).owner_id() == id);
    CHECK(pool.model(id).size() == 0);
  }

  FedDataset ghost;
  ghost.emplace("ghost", generate_blobs(10, 2, 2, 1.0, 0));
  CHECK(t::error_code([&] { FlexPool::create(ghost, client_server_architecture({"0"})); }) == ErrorCode::UnknownActor);
}

TEST_CASE("select by predicate, role and count") {
  auto pool = three_client_pool();
  auto picked = pool.select([](const std::string& id, const RoleSet&) { return id == "0" || id == "2"; });
  CHECK(picked.actor_ids() == std::vector<std::string>{"0", "2"});
  CHECK(pool.servers().actor_ids() == std::vector<std::string>{"server"});
  CHECK(pool.clients().size() == 3);
  CHECK(pool.aggregators().actor_ids() == std::vector<std::string>{"server"});
  CHECK(pool.select(4, 1).actor_ids() == pool.actor_ids());
  CHECK(pool.select(0, 1).empty());
  CHECK(t::error_code([&] { pool.select(5, 1); }) == ErrorCode::SelectionTooLarge);
  CHECK(pool.clients().select(2, 9).actor_ids() == pool.clients().select(2, 9).actor_ids());
}

TEST_CASE("random selection is roughly uniform") {
  auto pool = three_client_pool();
  auto clients = pool.clients();
  std::map<std::string, int> hits;
  for (std::uint64_t seed = 0; seed < 3000; ++seed)
    for (const auto& id : clients.select(1, seed).actor_ids()) ++hits[id];
  for (const auto& [id, n] : hits) CHECK(std::abs(n - 1000) < 120);
}

TEST_CASE("self-map mutations through a subpool are visible in the parent") {
  auto pool = three_client_pool(counter_init);
  auto sub = pool.select([](const std::string& id, const RoleSet&) { return id == "0" || id == "2"; });
  sub.map([](FlexModel& m, const Dataset*) { m.get<std::int64_t>("count") += 1; });
  CHECK(pool.model("0").get<std::int64_t>("count") == 1);
  CHECK(pool.model("1").get<std::int64_t>("count") == 0);
  CHECK(pool.model("2").get<std::int64_t>("count") == 1);

  pool.clients().map([](FlexModel& m, const Dataset* d) {
    REQUIRE(d != nullptr);
    m.get<std::int64_t>("count") += static_cast<std::int64_t>(d->n_samples());
  });
  CHECK(sub.model("2").get<std::int64_t>("count") == 31);
}

TEST_CASE("self-map visits in ascending id order and needs no permission") {
  auto pool = three_client_pool();
  std::vector<std::string> order;
  pool.map([&](FlexModel& m, const Dataset*) { order.push_back(m.owner_id()); });
  CHECK(order == std::vector<std::string>{"0", "1", "2", "server"});
  CHECK_NOTHROW(pool.clients().map([](FlexModel&, const Dataset*) {}));
}

TEST_CASE("cross-pool map permissions") {
  auto pool = three_client_pool();
  auto servers = pool.servers();
  auto clients = pool.clients();
  try {
    clients.map(kNoop, servers);
    FAIL("expected PermissionDenied");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PermissionDenied);
    CHECK(std::string(e.what()).find("'0'") != std::string::npos);
  }
  CHECK_NOTHROW(servers.map(kNoop, clients));
  CHECK_NOTHROW(servers.map(kNoop, pool));
}

TEST_CASE("one forbidden pair aborts the whole map before any call") {
  auto pool = three_client_pool();
  int calls = 0;
  auto counting = [&](FlexModel&, std::span<const FlexModel>, std::span<const std::string>) { ++calls; };
  // server -> {clients, server} is fine; the clients in the source are not.
  CHECK(t::error_code([&] { pool.map(counting, pool.servers()); }) == ErrorCode::PermissionDenied);
  CHECK(calls == 0);
}

TEST_CASE("collect map sees ordered snapshots and leaves destinations untouched") {
  auto pool = three_client_pool([](const std::string& id, const RoleSet& roles) {
    ModelEntries e;
    if (roles.is_client()) e.emplace("params", ParamVector{{std::stod(id) + 1}, "t"});
    return e;
  });
  auto servers = pool.servers();
  auto clients = pool.clients();
  std::vector<FlexModel> before;
  for (const auto& id : clients.actor_ids()) before.push_back(clients.model(id));

  servers.map(
      [](FlexModel& self, std::span<const FlexModel> peers, std::span<const std::string> ids) {
        ParamVectorList collected;
        TextList names;
        for (std::size_t i = 0; i < peers.size(); ++i) {
          collected.push_back(peers[i].get<ParamVector>("params"));
          names.push_back(ids[i]);
          CHECK(peers[i].owner_id() == ids[i]);
        }
        self.set("weights", collected);
        self.set("ids", names);
      },
      clients);

  const auto& got = pool.model("server").get<ParamVectorList>("weights");
  REQUIRE(got.size() == 3);
  CHECK(got[0].values == std::vector<double>{1});
  CHECK(got[2].values == std::vector<double>{3});
  CHECK(pool.model("server").get<TextList>("ids") == TextList{"0", "1", "2"});
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(clients.model(clients.actor_ids()[i]) == before[i]);
}

TEST_CASE("overlapping pools see a pre-map snapshot of their own model") {
  auto actors = p2p_architecture({"a", "b"});
  auto pool = FlexPool::create({}, actors, counter_init);
  pool.map(
      [](FlexModel& self, std::span<const FlexModel> peers, std::span<const std::string>) {
        std::int64_t sum = 0;
        for (const auto& p : peers) sum += p.get<std::int64_t>("count");
        self.get<std::int64_t>("count") = sum + 1;
      },
      pool);
  // "b" still sees a's count as 0 because the snapshot predates the map.
  CHECK(pool.model("a").get<std::int64_t>("count") == 1);
  CHECK(pool.model("b").get<std::int64_t>("count") == 1);
}

TEST_CASE("errors inside a map abort it and name the actor") {
  auto pool = three_client_pool(counter_init);
  std::vector<std::string> visited;
  try {
    pool.map([&](FlexModel& m, const Dataset*) {
      visited.push_back(m.owner_id());
      if (m.owner_id() == "1") (void)m.at("missing");
    });
    FAIL("expected MissingKey");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingKey);
    CHECK(std::string(e.what()).find("actor '1'") != std::string::npos);
  }
  CHECK(visited == std::vector<std::string>{"0", "1"});

  auto err = t::error_code([&] { pool.map([](FlexModel&, const Dataset*) { throw std::runtime_error("boom"); }); });
  CHECK(err == ErrorCode::ActorFailure);
}

TEST_CASE("FlexModel typed access") {
  FlexModel m("x");
  m.set("n", std::int64_t{3});
  m.set("r", 2.5);
  m.set("s", std::string("hi"));
  m.set("b", Bytes{{1, 2}});
  CHECK(m.get<std::int64_t>("n") == 3);
  CHECK(m.get<double>("r") == 2.5);
  CHECK(payload_type_name(m.at("b")) == "Opaque");
  CHECK(t::error_code([&] { m.get<double>("n"); }) == ErrorCode::WrongPayloadType);
  CHECK(t::error_code([&] { m.at("zzz"); }) == ErrorCode::MissingKey);
  CHECK(m.erase("n"));
  CHECK_FALSE(m.contains("n"));
}
