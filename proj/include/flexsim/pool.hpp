#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "flexsim/actors.hpp"
#include "flexsim/dataset.hpp"
#include "flexsim/param_vector.hpp"
#include "flexsim/partition.hpp"

namespace flexsim {

struct Bytes {
  std::vector<std::uint8_t> data;
  bool operator==(const Bytes&) const = default;
};
using ParamVectorList = std::vector<ParamVector>;
using TextList = std::vector<std::string>;
using IntList = std::vector<std::int64_t>;

/// Tagged value stored under a key of a FlexModel.
using PayloadValue =
    std::variant<ParamVector, double, std::int64_t, std::string, ParamVectorList, Bytes, TextList, IntList>;

std::string_view payload_type_name(const PayloadValue& value);

/// Key-value store owned by one actor.
class FlexModel {
 public:
  explicit FlexModel(std::string owner_id) : owner_id_(std::move(owner_id)) {}

  const std::string& owner_id() const noexcept { return owner_id_; }

  bool contains(const std::string& key) const { return entries_.contains(key); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, PayloadValue>& entries() const noexcept { return entries_; }

  void set(const std::string& key, PayloadValue value) { entries_.insert_or_assign(key, std::move(value)); }
  bool erase(const std::string& key) { return entries_.erase(key) > 0; }

  /// MissingKey naming the owner if absent.
  const PayloadValue& at(const std::string& key) const;
  PayloadValue& at(const std::string& key);

  /// Typed access; WrongPayloadType if the stored value has another tag.
  template <typename T>
  const T& get(const std::string& key) const {
    const auto& value = at(key);
    if (const T* typed = std::get_if<T>(&value)) return *typed;
    wrong_type(key, value);
  }
  template <typename T>
  T& get(const std::string& key) {
    auto& value = at(key);
    if (T* typed = std::get_if<T>(&value)) return *typed;
    wrong_type(key, value);
  }

  bool operator==(const FlexModel&) const = default;

 private:
  [[noreturn]] void wrong_type(const std::string& key, const PayloadValue& value) const;

  std::string owner_id_;
  std::map<std::string, PayloadValue> entries_;
};

using ModelEntries = std::map<std::string, PayloadValue>;
using ModelInitializer = std::function<ModelEntries(const std::string& actor_id, const RoleSet& roles)>;

/// Local computation on an actor's own model and data (null if it holds none).
using LocalFn = std::function<void(FlexModel& self, const Dataset* data)>;
/// Cross-pool step: the source actor's model plus read-only snapshots of the
/// destination models, both sequences in ascending actor-id order.
using RemoteFn = std::function<void(FlexModel& self, std::span<const FlexModel> peers,
                                    std::span<const std::string> peer_ids)>;
using ActorPredicate = std::function<bool(const std::string& actor_id, const RoleSet& roles)>;

/// Actors joined with their datasets and models. Pools produced by select()
/// are views: they share model (and data) storage with the pool they came from.
class FlexPool {
 public:
  /// UnknownActor if `fed` has an id that `actors` lacks. Actors without data
  /// (e.g. the server) are allowed.
  static FlexPool create(FedDataset fed, FlexActors actors, const ModelInitializer& init = {});

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  /// Member ids in ascending order.
  const std::vector<std::string>& actor_ids() const& noexcept { return ids_; }
  std::vector<std::string> actor_ids() && { return std::move(ids_); }
  bool contains(const std::string& id) const;

  /// UnknownActor if `id` is not a member of this view.
  const RoleSet& roles(const std::string& id) const;
  const Dataset* data(const std::string& id) const;
  FlexModel& model(const std::string& id);
  const FlexModel& model(const std::string& id) const;

  /// Replaces an actor's dataset in the shared storage.
  void replace_data(const std::string& id, Dataset d);

  FlexPool select(const ActorPredicate& predicate) const;
  /// `n` actors drawn uniformly without replacement; SelectionTooLarge if n > size().
  FlexPool select(std::size_t n, std::uint64_t seed) const;

  FlexPool clients() const;
  FlexPool aggregators() const;
  FlexPool servers() const;

  /// Runs `f` on every member's model and data, in ascending id order.
  void map(const LocalFn& f);

  /// Source actors (ascending id) each get `f` with snapshots of `dst`'s models
  /// taken before the first call. Every (src, dst) pair must pass can_initiate,
  /// otherwise PermissionDenied is thrown before `f` runs at all. An error from
  /// `f` stops the map and is rethrown with the failing actor's id.
  void map(const RemoteFn& f, const FlexPool& dst);

 private:
  struct Storage {
    FlexActors actors;
    std::map<std::string, Dataset> data;
    std::map<std::string, FlexModel> models;
  };

  FlexPool(std::shared_ptr<Storage> storage, std::vector<std::string> ids)
      : storage_(std::move(storage)), ids_(std::move(ids)) {}

  void require_member(const std::string& id) const;

  std::shared_ptr<Storage> storage_;
  std::vector<std::string> ids_;
};

}  // namespace flexsim
