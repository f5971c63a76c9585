#include "flexsim/actors.hpp"

#include <array>
#include <set>

#include "flexsim/error.hpp"

namespace flexsim {

namespace {
constexpr std::array<Role, 3> kAllRoles = {Role::Client, Role::Aggregator, Role::Server};
constexpr std::uint8_t kAllBits = 7;

struct RolePair {
  Role from;
  Role to;
};
constexpr std::array<RolePair, 4> kAllowed = {{
    {Role::Server, Role::Server},
    {Role::Server, Role::Client},
    {Role::Aggregator, Role::Aggregator},
    {Role::Aggregator, Role::Server},
}};
}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Client: return "client";
    case Role::Aggregator: return "aggregator";
    case Role::Server: return "server";
  }
  return "?";
}

RoleSet::RoleSet(std::initializer_list<Role> roles) : bits_(0) {
  for (Role r : roles) bits_ |= static_cast<std::uint8_t>(r);
  if (bits_ == 0) throw Error(ErrorCode::InvalidArgument, "a role set cannot be empty");
}

RoleSet RoleSet::from_bits(std::uint8_t bits) {
  if (bits == 0 || (bits & ~kAllBits) != 0) {
    throw Error(ErrorCode::InvalidArgument, "invalid role bitmask " + std::to_string(bits));
  }
  return RoleSet(bits);
}

std::vector<Role> RoleSet::roles() const {
  std::vector<Role> out;
  for (Role r : kAllRoles) {
    if (contains(r)) out.push_back(r);
  }
  return out;
}

std::string RoleSet::to_string() const {
  std::string out = "{";
  for (Role r : roles()) {
    if (out.size() > 1) out += ",";
    out += flexsim::to_string(r);
  }
  return out + "}";
}

bool can_initiate(const RoleSet& src, const RoleSet& dst) noexcept {
  for (const auto& pair : kAllowed) {
    if (src.contains(pair.from) && dst.contains(pair.to)) return true;
  }
  return false;
}

const RoleSet& FlexActors::roles(const std::string& id) const {
  auto it = actors_.find(id);
  if (it == actors_.end()) throw Error(ErrorCode::UnknownActor, "no actor with id '" + id + "'");
  return it->second;
}

FlexActors client_server_architecture(const std::vector<std::string>& client_ids,
                                      const std::string& server_id) {
  std::map<std::string, RoleSet> actors;
  for (const auto& id : client_ids) {
    if (id == server_id) {
      throw Error(ErrorCode::DuplicateId, "client id '" + id + "' collides with the server id");
    }
    if (!actors.emplace(id, RoleSet::client()).second) {
      throw Error(ErrorCode::DuplicateId, "client id '" + id + "' repeated");
    }
  }
  actors.emplace(server_id, RoleSet::server_aggregator());
  return FlexActors(std::move(actors));
}

FlexActors p2p_architecture(const std::vector<std::string>& node_ids) {
  if (node_ids.empty()) throw Error(ErrorCode::EmptyArchitecture, "p2p architecture needs at least one node");
  std::map<std::string, RoleSet> actors;
  for (const auto& id : node_ids) {
    if (!actors.emplace(id, RoleSet::all()).second) {
      throw Error(ErrorCode::DuplicateId, "node id '" + id + "' repeated");
    }
  }
  return FlexActors(std::move(actors));
}

}  // namespace flexsim
