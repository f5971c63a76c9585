#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flexsim {

/// Flat model parameters plus a tag describing their layout. The unit
/// exchanged between actors; two vectors combine only if their tags match.
struct ParamVector {
  std::vector<double> values;
  std::string shape_tag;

  std::size_t size() const noexcept { return values.size(); }
  bool combinable_with(const ParamVector& other) const noexcept {
    return shape_tag == other.shape_tag && values.size() == other.values.size();
  }

  bool operator==(const ParamVector&) const = default;
};

/// InvalidArgument unless nonempty with finite entries.
void check_param_vector(const ParamVector& p);

/// ShapeMismatch unless `a` and `b` are combinable.
void check_combinable(const ParamVector& a, const ParamVector& b);

double l2_norm(std::span<const double> v);

}  // namespace flexsim
