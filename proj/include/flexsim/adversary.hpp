#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "flexsim/param_vector.hpp"
#include "flexsim/pool.hpp"

namespace flexsim {

enum class AttackKind { LabelFlip, SignFlip, GaussianNoise };

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);

/// A static attack: the same attackers misbehave in every round they take part in.
struct AttackSpec {
  AttackKind kind = AttackKind::SignFlip;
  std::vector<std::string> attacker_ids;
  /// label_flip: class -> class; unmapped classes stay as they are.
  std::map<std::int64_t, std::int64_t> flip_map;
  /// sign_flip: update multiplier gamma; gaussian_noise: noise standard deviation.
  double scale = 1.0;
  std::uint64_t seed = 0;

  bool operator==(const AttackSpec&) const = default;
};

/// Checks the spec on its own (nonempty attackers, nonnegative scale) and
/// against `pool`: attackers must be clients of it, and flip_map classes must
/// occur in the clients' labels. Throws UnknownAttacker / InvalidArgument.
void validate(const AttackSpec& atk, const FlexPool& pool);

/// Remaps the attackers' labels through atk.flip_map, replacing their datasets in `pool`.
void poison_data(FlexPool& pool, const AttackSpec& atk);

/// The parameters an attacker submits instead of `params_after`.
/// sign_flip: before - scale * (after - before).
/// gaussian_noise: after + N(0, scale^2) per coordinate, seeded by
/// (atk.seed, attacker_id, round).
ParamVector poison_update(const ParamVector& params_before, const ParamVector& params_after,
                          const AttackSpec& atk, std::string_view attacker_id = {},
                          std::uint64_t round = 0);

struct RoundConfig;

/// `run` with `atk` active, after checking it against `pool`.
RoundConfig attach_attack(RoundConfig run, const AttackSpec& atk, const FlexPool& pool);

}  // namespace flexsim
