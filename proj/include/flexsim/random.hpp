#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace flexsim {

/// Derives an independent 64-bit seed from a base seed and a list of stream keys
/// (splitmix64 chaining). Equal inputs always give the same substream.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

/// FNV-1a hash, for keying substreams by actor id.
std::uint64_t hash_id(std::string_view id);

/// Seeded generator used everywhere randomness is needed. The engine is
/// mt19937_64; the distributions are implemented here rather than taken from
/// <random> so that outputs do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via the Box-Muller transform.
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

  /// `count` distinct elements of `pool` drawn uniformly without replacement,
  /// in draw order (partial Fisher-Yates on a copy).
  template <typename T>
  std::vector<T> sample(std::span<const T> pool, std::size_t count) {
    std::vector<T> work(pool.begin(), pool.end());
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t j = i + static_cast<std::size_t>(below(work.size() - i));
      std::swap(work[i], work[j]);
    }
    work.resize(count);
    return work;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace flexsim
