#include <doctest.h>

#include <vector>

#include "flexsim/actors.hpp"
#include "test_support.hpp"

using namespace flexsim;
namespace t = flexsim::testing;

namespace {
std::vector<RoleSet> every_role_set() {
  std::vector<RoleSet> out;
  for (std::uint8_t bits = 1; bits < 8; ++bits) out.push_back(RoleSet::from_bits(bits));
  return out;
}

// The four permitted (initiator, receiver) role pairs.
bool pair_allowed(Role a, Role b) {
  return (a == Role::Server && b == Role::Server) || (a == Role::Server && b == Role::Client) ||
         (a == Role::Aggregator && b == Role::Aggregator) || (a == Role::Aggregator && b == Role::Server);
}
}  // namespace

TEST_CASE("can_initiate examples") {
  CHECK(can_initiate(RoleSet::server_aggregator(), RoleSet::client()));
  CHECK_FALSE(can_initiate(RoleSet::client(), RoleSet{Role::Server}));
  CHECK_FALSE(can_initiate(RoleSet{Role::Aggregator}, RoleSet::client()));
  CHECK(can_initiate(RoleSet{Role::Server}, RoleSet{Role::Server}));
  CHECK(can_initiate(RoleSet{Role::Aggregator}, RoleSet{Role::Aggregator}));
  CHECK(can_initiate(RoleSet{Role::Aggregator}, RoleSet{Role::Server}));
}

TEST_CASE("can_initiate equals the existential closure over role pairs") {
  for (const auto& src : every_role_set()) {
    for (const auto& dst : every_role_set()) {
      bool expected = false;
      for (Role a : src.roles())
        for (Role b : dst.roles()) expected = expected || pair_allowed(a, b);
      CHECK_MESSAGE(can_initiate(src, dst) == expected, src.to_string() << " -> " << dst.to_string());
    }
  }
}

TEST_CASE("clients never initiate and adding roles is monotone") {
  for (const auto& dst : every_role_set()) CHECK_FALSE(can_initiate(RoleSet::client(), dst));
  for (const auto& a : every_role_set())
    for (const auto& b : every_role_set()) {
      if ((a.bits() & b.bits()) != a.bits()) continue;  // a is a subset of b
      for (const auto& dst : every_role_set())
        if (can_initiate(a, dst)) CHECK(can_initiate(b, dst));
    }
}

TEST_CASE("RoleSet construction") {
  CHECK(RoleSet{Role::Client, Role::Client} == RoleSet::client());
  CHECK(RoleSet::all().roles().size() == 3);
  CHECK(t::error_code([] { RoleSet::from_bits(0); }) == ErrorCode::InvalidArgument);
  CHECK(t::error_code([] { RoleSet::from_bits(8); }) == ErrorCode::InvalidArgument);
  CHECK(t::error_code([] { RoleSet{}; }) == ErrorCode::InvalidArgument);
}

TEST_CASE("client_server_architecture") {
  auto actors = client_server_architecture({"0", "1", "2"}, "server");
  CHECK(actors.size() == 4);
  CHECK(actors.roles("server") == RoleSet::server_aggregator());
  CHECK(actors.roles("1") == RoleSet::client());

  auto lone = client_server_architecture({}, "s");
  CHECK(lone.size() == 1);
  CHECK(lone.roles("s") == RoleSet::server_aggregator());

  CHECK(t::error_code([] { client_server_architecture({"a", "a"}, "s"); }) == ErrorCode::DuplicateId);
  CHECK(t::error_code([] { client_server_architecture({"s"}, "s"); }) == ErrorCode::DuplicateId);
  CHECK(t::error_code([&] { actors.roles("nobody"); }) == ErrorCode::UnknownActor);
}

TEST_CASE("p2p_architecture") {
  auto actors = p2p_architecture({"a", "b"});
  CHECK(actors.roles("a") == RoleSet::all());
  CHECK(actors.roles("b") == RoleSet::all());
  CHECK(can_initiate(actors.roles("a"), actors.roles("b")));
  CHECK(p2p_architecture({"x"}).size() == 1);
  CHECK(t::error_code([] { p2p_architecture({}); }) == ErrorCode::EmptyArchitecture);
  CHECK(t::error_code([] { p2p_architecture({"x", "x"}); }) == ErrorCode::DuplicateId);
}
