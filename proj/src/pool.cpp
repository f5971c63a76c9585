#include "flexsim/pool.hpp"

#include <algorithm>

#include "flexsim/error.hpp"
#include "flexsim/random.hpp"

namespace flexsim {

std::string_view payload_type_name(const PayloadValue& value) {
  struct Namer {
    std::string_view operator()(const ParamVector&) const { return "ParamVector"; }
    std::string_view operator()(double) const { return "RealScalar"; }
    std::string_view operator()(std::int64_t) const { return "IntScalar"; }
    std::string_view operator()(const std::string&) const { return "Text"; }
    std::string_view operator()(const ParamVectorList&) const { return "ParamVectorList"; }
    std::string_view operator()(const Bytes&) const { return "Opaque"; }
    std::string_view operator()(const TextList&) const { return "TextList"; }
    std::string_view operator()(const IntList&) const { return "IntList"; }
  };
  return std::visit(Namer{}, value);
}

const PayloadValue& FlexModel::at(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw Error(ErrorCode::MissingKey, "actor '" + owner_id_ + "' has no key '" + key + "'");
  }
  return it->second;
}

PayloadValue& FlexModel::at(const std::string& key) {
  return const_cast<PayloadValue&>(std::as_const(*this).at(key));
}

void FlexModel::wrong_type(const std::string& key, const PayloadValue& value) const {
  throw Error(ErrorCode::WrongPayloadType, "actor '" + owner_id_ + "' key '" + key + "' holds a " +
                                               std::string(payload_type_name(value)));
}

FlexPool FlexPool::create(FedDataset fed, FlexActors actors, const ModelInitializer& init) {
  auto storage = std::make_shared<Storage>();
  for (auto& [id, dataset] : fed) {
    if (!actors.contains(id)) {
      throw Error(ErrorCode::UnknownActor, "dataset node '" + id + "' is not an actor of the pool");
    }
    storage->data.emplace(id, std::move(dataset));
  }
  std::vector<std::string> ids;
  for (const auto& [id, roles] : actors) {
    FlexModel model(id);
    if (init) {
      for (auto& [key, value] : init(id, roles)) model.set(key, std::move(value));
    }
    storage->models.emplace(id, std::move(model));
    ids.push_back(id);
  }
  storage->actors = std::move(actors);
  return FlexPool(std::move(storage), std::move(ids));
}

bool FlexPool::contains(const std::string& id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

void FlexPool::require_member(const std::string& id) const {
  if (!contains(id)) throw Error(ErrorCode::UnknownActor, "actor '" + id + "' is not in this pool");
}

const RoleSet& FlexPool::roles(const std::string& id) const {
  require_member(id);
  return storage_->actors.roles(id);
}

const Dataset* FlexPool::data(const std::string& id) const {
  require_member(id);
  auto it = storage_->data.find(id);
  return it == storage_->data.end() ? nullptr : &it->second;
}

FlexModel& FlexPool::model(const std::string& id) {
  require_member(id);
  return storage_->models.at(id);
}

const FlexModel& FlexPool::model(const std::string& id) const {
  require_member(id);
  return storage_->models.at(id);
}

void FlexPool::replace_data(const std::string& id, Dataset d) {
  require_member(id);
  storage_->data.insert_or_assign(id, std::move(d));
}

FlexPool FlexPool::select(const ActorPredicate& predicate) const {
  std::vector<std::string> picked;
  for (const auto& id : ids_) {
    if (predicate(id, storage_->actors.roles(id))) picked.push_back(id);
  }
  return FlexPool(storage_, std::move(picked));
}

FlexPool FlexPool::select(std::size_t n, std::uint64_t seed) const {
  if (n > ids_.size()) {
    throw Error(ErrorCode::SelectionTooLarge, "cannot select " + std::to_string(n) + " of " +
                                                  std::to_string(ids_.size()) + " actors");
  }
  Rng rng(seed);
  auto picked = rng.sample(std::span<const std::string>(ids_), n);
  std::sort(picked.begin(), picked.end());
  return FlexPool(storage_, std::move(picked));
}

FlexPool FlexPool::clients() const {
  return select([](const std::string&, const RoleSet& r) { return r.is_client(); });
}

FlexPool FlexPool::aggregators() const {
  return select([](const std::string&, const RoleSet& r) { return r.is_aggregator(); });
}

FlexPool FlexPool::servers() const {
  return select([](const std::string&, const RoleSet& r) { return r.is_server(); });
}

namespace {

template <typename Call>
void invoke_as(const std::string& id, Call&& call) {
  try {
    call();
  } catch (const Error& e) {
    throw e.with_context("actor '" + id + "'");
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ActorFailure, "actor '" + id + "': " + e.what());
  }
}

}  // namespace

void FlexPool::map(const LocalFn& f) {
  for (const auto& id : ids_) {
    invoke_as(id, [&] { f(model(id), data(id)); });
  }
}

void FlexPool::map(const RemoteFn& f, const FlexPool& dst) {
  for (const auto& src_id : ids_) {
    const auto& src_roles = roles(src_id);
    for (const auto& dst_id : dst.ids_) {
      const auto& dst_roles = dst.roles(dst_id);
      if (!can_initiate(src_roles, dst_roles)) {
        throw Error(ErrorCode::PermissionDenied, "actor '" + src_id + "' " + src_roles.to_string() +
                                                     " may not initiate communication with actor '" +
                                                     dst_id + "' " + dst_roles.to_string());
      }
    }
  }

  std::vector<FlexModel> snapshot;
  snapshot.reserve(dst.size());
  for (const auto& dst_id : dst.ids_) snapshot.push_back(dst.model(dst_id));

  for (const auto& src_id : ids_) {
    invoke_as(src_id, [&] { f(model(src_id), snapshot, dst.ids_); });
  }
}

}  // namespace flexsim
