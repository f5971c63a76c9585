#include "flexsim/adversary.hpp"

#include <cmath>
#include <set>

#include "flexsim/error.hpp"
#include "flexsim/flows.hpp"
#include "flexsim/random.hpp"

namespace flexsim {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::LabelFlip: return "label_flip";
    case AttackKind::SignFlip: return "sign_flip";
    case AttackKind::GaussianNoise: return "gaussian_noise";
  }
  return "?";
}

AttackKind parse_attack_kind(std::string_view name) {
  for (auto kind : {AttackKind::LabelFlip, AttackKind::SignFlip, AttackKind::GaussianNoise}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown attack kind '" + std::string(name) + "'");
}

void validate(const AttackSpec& atk, const FlexPool& pool) {
  if (atk.attacker_ids.empty()) throw Error(ErrorCode::InvalidArgument, "attack needs at least one attacker");
  if (!(atk.scale >= 0.0) || !std::isfinite(atk.scale)) {
    throw Error(ErrorCode::InvalidArgument, "attack scale must be a finite nonnegative real");
  }
  std::set<std::string> seen;
  for (const auto& id : atk.attacker_ids) {
    if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateId, "attacker '" + id + "' listed twice");
    if (!pool.contains(id) || !pool.roles(id).is_client() || pool.roles(id).is_server()) {
      throw Error(ErrorCode::UnknownAttacker, "attacker '" + id + "' is not a client of the pool");
    }
  }
  if (atk.kind != AttackKind::LabelFlip || atk.flip_map.empty()) return;

  std::set<std::int64_t> classes;
  for (const auto& id : pool.clients().actor_ids()) {
    const Dataset* d = pool.data(id);
    if (d && d->is_classification()) classes.insert(d->class_labels().begin(), d->class_labels().end());
  }
  for (const auto& [from, to] : atk.flip_map) {
    if (!classes.contains(from) || !classes.contains(to)) {
      throw Error(ErrorCode::InvalidArgument, "flip_map entry " + std::to_string(from) + " -> " +
                                                  std::to_string(to) + " names a class no client holds");
    }
  }
}

void poison_data(FlexPool& pool, const AttackSpec& atk) {
  if (atk.kind != AttackKind::LabelFlip) {
    throw Error(ErrorCode::InvalidArgument, "poison_data applies to label_flip attacks only");
  }
  validate(atk, pool);
  for (const auto& id : atk.attacker_ids) {
    const Dataset* d = pool.data(id);
    if (d == nullptr || !d->has_labels()) {
      throw Error(ErrorCode::NoLabels, "attacker '" + id + "' holds no labeled data");
    }
    ClassLabels labels = d->class_labels();
    for (auto& label : labels) {
      if (auto it = atk.flip_map.find(label); it != atk.flip_map.end()) label = it->second;
    }
    pool.replace_data(id, d->with_labels(Labels{std::move(labels)}));
  }
}

ParamVector poison_update(const ParamVector& params_before, const ParamVector& params_after,
                          const AttackSpec& atk, std::string_view attacker_id, std::uint64_t round) {
  check_combinable(params_before, params_after);
  ParamVector out = params_after;
  switch (atk.kind) {
    case AttackKind::SignFlip:
      for (std::size_t j = 0; j < out.size(); ++j) {
        double update = params_after.values[j] - params_before.values[j];
        out.values[j] = params_before.values[j] - atk.scale * update;
      }
      break;
    case AttackKind::GaussianNoise: {
      if (atk.scale == 0.0) break;
      Rng rng(derive_seed(atk.seed, {hash_id(attacker_id), round}));
      for (double& v : out.values) v += atk.scale * rng.normal();
      break;
    }
    case AttackKind::LabelFlip:
      throw Error(ErrorCode::InvalidArgument, "label_flip does not poison updates");
  }
  return out;
}

RoundConfig attach_attack(RoundConfig run, const AttackSpec& atk, const FlexPool& pool) {
  validate(atk, pool);
  run.attack = atk;
  return run;
}

}  // namespace flexsim
