#include "flexsim/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "flexsim/error.hpp"
#include "flexsim/random.hpp"

namespace flexsim {

std::string_view to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::FedAvg: return "fed_avg";
    case AggregatorKind::WeightedAvg: return "weighted_avg";
    case AggregatorKind::ClippedAvg: return "clipped_avg";
    case AggregatorKind::CoordMedian: return "coord_median";
    case AggregatorKind::TrimmedMean: return "trimmed_mean";
  }
  return "?";
}

AggregatorKind parse_aggregator_kind(std::string_view name) {
  for (auto kind : {AggregatorKind::FedAvg, AggregatorKind::WeightedAvg, AggregatorKind::ClippedAvg,
                    AggregatorKind::CoordMedian, AggregatorKind::TrimmedMean}) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown aggregator kind '" + std::string(name) + "'");
}

void validate(const AggregatorSpec& spec) {
  const auto kind = spec.kind;
  const std::string name(to_string(kind));
  auto reject = [&](const char* field) {
    throw Error(ErrorCode::InvalidArgument, std::string(field) + " does not apply to " + name);
  };

  if (kind == AggregatorKind::ClippedAvg) {
    if (!spec.clip_norm) throw Error(ErrorCode::InvalidArgument, "clipped_avg needs clip_norm");
    if (!(*spec.clip_norm > 0.0) || !std::isfinite(*spec.clip_norm)) {
      throw Error(ErrorCode::InvalidArgument, "clip_norm must be a finite positive real");
    }
  } else if (spec.clip_norm) {
    reject("clip_norm");
  }

  if (kind == AggregatorKind::TrimmedMean) {
    if (!spec.trim_fraction) throw Error(ErrorCode::InvalidArgument, "trimmed_mean needs trim_fraction");
    if (!(*spec.trim_fraction >= 0.0 && *spec.trim_fraction < 0.5)) {
      throw Error(ErrorCode::InvalidArgument, "trim_fraction must lie in [0, 0.5)");
    }
  } else if (spec.trim_fraction) {
    reject("trim_fraction");
  }

  if (kind == AggregatorKind::WeightedAvg) {
    if (spec.weights && spec.size_weighted) {
      throw Error(ErrorCode::InvalidArgument, "weights and size_weighted are mutually exclusive");
    }
    if (spec.weights) {
      for (double w : *spec.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
          throw Error(ErrorCode::InvalidArgument, "aggregation weights must be finite and nonnegative");
        }
      }
    }
  } else {
    if (spec.weights) reject("weights");
    if (spec.size_weighted) reject("size_weighted");
  }
}

namespace {

// Mean of `values` anchored at their minimum and clamped to their range.
// Sorting first makes the result independent of input order; anchoring makes
// the mean of identical values exact.
double anchored_mean(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  const double lo = values.front();
  double acc = 0.0;
  for (double v : values) acc += v - lo;
  double mean = lo + acc / static_cast<double>(values.size());
  return std::clamp(mean, lo, values.back());
}

double anchored_weighted_mean(std::vector<std::pair<double, double>>& value_weight) {
  std::sort(value_weight.begin(), value_weight.end());
  const double lo = value_weight.front().first;
  const double hi = value_weight.back().first;
  double acc = 0.0;
  double total = 0.0;
  for (const auto& [v, w] : value_weight) {
    acc += w * (v - lo);
    total += w;
  }
  return std::clamp(lo + acc / total, lo, hi);
}

double median(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  if (k % 2 == 1) return values[k / 2];
  double a = values[k / 2 - 1];
  double b = values[k / 2];
  return a + (b - a) / 2.0;
}

std::size_t trim_count(double fraction, std::size_t k) {
  // A product a rounding error below an integer counts as that integer.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(k) + 1e-9));
}

std::vector<double> resolve_weights(const AggregatorSpec& spec, std::size_t k,
                                    std::span<const std::int64_t> sizes, std::uint64_t round) {
  std::vector<double> w;
  if (spec.weights) {
    w = *spec.weights;
  } else if (spec.size_weighted) {
    if (sizes.size() != k) {
      throw Error(ErrorCode::ShapeMismatch, "size weighting needs one sample count per collected vector");
    }
    w.assign(sizes.begin(), sizes.end());
  } else {
    Rng rng(derive_seed(spec.seed, {round}));
    w.resize(k);
    for (double& x : w) x = rng.uniform();
  }
  if (w.size() != k) {
    throw Error(ErrorCode::ShapeMismatch, std::to_string(w.size()) + " aggregation weights for " +
                                              std::to_string(k) + " collected vectors");
  }
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "aggregation weights sum to zero");
  for (double& x : w) x /= total;
  return w;
}

}  // namespace

ParamVector aggregate_params(const AggregatorSpec& spec, std::span<const ParamVector> collected,
                             const ParamVector* current, std::span<const std::int64_t> sizes,
                             std::uint64_t round) {
  validate(spec);
  if (collected.empty()) throw Error(ErrorCode::EmptyCollection, "nothing collected to aggregate");
  const ParamVector& first = collected.front();
  for (const auto& p : collected) check_combinable(first, p);

  const std::size_t k = collected.size();
  const std::size_t dim = first.size();
  ParamVector out{std::vector<double>(dim), first.shape_tag};
  std::vector<double> column(k);

  switch (spec.kind) {
    case AggregatorKind::FedAvg:
      for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < k; ++i) column[i] = collected[i].values[j];
        out.values[j] = anchored_mean(column);
      }
      break;

    case AggregatorKind::WeightedAvg: {
      auto w = resolve_weights(spec, k, sizes, round);
      std::vector<std::pair<double, double>> pairs(k);
      for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < k; ++i) pairs[i] = {collected[i].values[j], w[i]};
        out.values[j] = anchored_weighted_mean(pairs);
      }
      break;
    }

    case AggregatorKind::ClippedAvg: {
      if (!current) throw Error(ErrorCode::MissingKey, "clipped_avg needs the current server parameters");
      check_combinable(first, *current);
      const double clip = *spec.clip_norm;
      std::vector<std::vector<double>> updates(k, std::vector<double>(dim));
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < dim; ++j) updates[i][j] = collected[i].values[j] - current->values[j];
        double norm = l2_norm(updates[i]);
        if (norm > clip) {
          double scale = clip / norm;
          for (double& u : updates[i]) u *= scale;
        }
      }
      for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < k; ++i) column[i] = updates[i][j];
        out.values[j] = current->values[j] + anchored_mean(column);
      }
      break;
    }

    case AggregatorKind::CoordMedian:
      for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < k; ++i) column[i] = collected[i].values[j];
        out.values[j] = median(column);
      }
      break;

    case AggregatorKind::TrimmedMean: {
      const std::size_t t = trim_count(*spec.trim_fraction, k);
      if (2 * t >= k) {
        throw Error(ErrorCode::AllTrimmed, "trimming " + std::to_string(t) + " from each end of " +
                                               std::to_string(k) + " values leaves nothing");
      }
      for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < k; ++i) column[i] = collected[i].values[j];
        std::sort(column.begin(), column.end());
        std::vector<double> kept(column.begin() + static_cast<std::ptrdiff_t>(t),
                                 column.end() - static_cast<std::ptrdiff_t>(t));
        out.values[j] = anchored_mean(kept);
      }
      break;
    }
  }
  return out;
}

}  // namespace flexsim
