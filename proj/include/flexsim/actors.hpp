#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace flexsim {

enum class Role : std::uint8_t { Client = 1, Aggregator = 2, Server = 4 };

std::string_view to_string(Role role);

/// Nonempty set of roles held by one actor.
class RoleSet {
 public:
  RoleSet(std::initializer_list<Role> roles);
  /// From a bitmask of Role values; throws InvalidArgument on 0 or stray bits.
  static RoleSet from_bits(std::uint8_t bits);

  static RoleSet client() { return {Role::Client}; }
  static RoleSet server_aggregator() { return {Role::Server, Role::Aggregator}; }
  static RoleSet all() { return {Role::Client, Role::Aggregator, Role::Server}; }

  bool contains(Role role) const noexcept { return (bits_ & static_cast<std::uint8_t>(role)) != 0; }
  bool is_client() const noexcept { return contains(Role::Client); }
  bool is_aggregator() const noexcept { return contains(Role::Aggregator); }
  bool is_server() const noexcept { return contains(Role::Server); }

  std::uint8_t bits() const noexcept { return bits_; }
  std::vector<Role> roles() const;
  std::string to_string() const;

  bool operator==(const RoleSet&) const = default;

 private:
  explicit RoleSet(std::uint8_t bits) : bits_(bits) {}
  std::uint8_t bits_;
};

/// Whether an actor holding `src` may open communication with one holding `dst`.
/// Allowed pairs: Server->Server, Server->Client, Aggregator->Aggregator,
/// Aggregator->Server. A client never initiates.
bool can_initiate(const RoleSet& src, const RoleSet& dst) noexcept;

/// Actor id -> roles. Fixed once built.
class FlexActors {
 public:
  FlexActors() = default;
  explicit FlexActors(std::map<std::string, RoleSet> actors) : actors_(std::move(actors)) {}

  std::size_t size() const noexcept { return actors_.size(); }
  bool contains(const std::string& id) const { return actors_.contains(id); }
  /// UnknownActor if absent.
  const RoleSet& roles(const std::string& id) const;

  auto begin() const { return actors_.begin(); }
  auto end() const { return actors_.end(); }

  bool operator==(const FlexActors&) const = default;

 private:
  std::map<std::string, RoleSet> actors_;
};

/// Each client gets {Client}; the server gets {Server, Aggregator}.
FlexActors client_server_architecture(const std::vector<std::string>& client_ids,
                                      const std::string& server_id = "server");

/// Every node holds all three roles.
FlexActors p2p_architecture(const std::vector<std::string>& node_ids);

}  // namespace flexsim
