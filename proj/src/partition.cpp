#include "flexsim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "flexsim/error.hpp"
#include "flexsim/random.hpp"

namespace flexsim {

namespace {

constexpr double kSumTolerance = 1e-9;

// Substream keys for the different random decisions of a split.
constexpr std::uint64_t kClassStream = 1;
constexpr std::uint64_t kRowStream = 2;
constexpr std::uint64_t kFeatureStream = 3;

double sum_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void check_fraction(double w, const std::string& what) {
  if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
    throw Error(ErrorCode::InvalidWeights, what + " must lie in [0, 1], got " + format_real(w));
  }
}

void check_length(std::size_t got, std::size_t n_nodes, const char* field) {
  if (got != n_nodes) {
    throw Error(ErrorCode::BadLength, std::string(field) + " has length " + std::to_string(got) +
                                          " but n_nodes is " + std::to_string(n_nodes));
  }
}

std::vector<std::size_t> positions(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

// Disjoint consecutive slices of `shuffled` with the given sizes, appended per node.
void assign_slices(std::span<const std::size_t> shuffled, std::span<const std::size_t> quotas,
                   std::vector<std::vector<std::size_t>>& rows) {
  std::size_t offset = 0;
  for (std::size_t node = 0; node < quotas.size(); ++node) {
    rows[node].insert(rows[node].end(), shuffled.begin() + static_cast<std::ptrdiff_t>(offset),
                      shuffled.begin() + static_cast<std::ptrdiff_t>(offset + quotas[node]));
    offset += quotas[node];
  }
}

// Independent draws without replacement per node; nodes may overlap.
void assign_draws(std::span<const std::size_t> candidates, std::span<const std::size_t> quotas,
                  std::uint64_t stream_seed, std::vector<std::vector<std::size_t>>& rows) {
  for (std::size_t node = 0; node < quotas.size(); ++node) {
    Rng rng(derive_seed(stream_seed, {node + 1}));
    auto drawn = rng.sample(candidates, std::min(quotas[node], candidates.size()));
    rows[node].insert(rows[node].end(), drawn.begin(), drawn.end());
  }
}

std::vector<std::size_t> independent_quotas(std::size_t total, std::span<const double> weights) {
  std::vector<std::size_t> q(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    auto share = std::llround(weights[i] * static_cast<double>(total));
    q[i] = std::min<std::size_t>(static_cast<std::size_t>(std::max<long long>(share, 0)), total);
  }
  return q;
}

}  // namespace

std::vector<std::string> FedDatasetConfig::resolved_node_ids() const {
  if (node_ids) return *node_ids;
  std::vector<std::string> ids;
  ids.reserve(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) ids.push_back(std::to_string(i));
  return ids;
}

std::vector<std::size_t> apportion(std::size_t total, std::span<const double> weights) {
  if (weights.empty() || all_zero(weights)) {
    throw Error(ErrorCode::InvalidArgument, "apportion needs at least one nonzero weight");
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "apportion weights must be finite and nonnegative");
    }
  }
  const double weight_sum = sum_of(weights);
  const double denom = std::max(weight_sum, 1.0);
  const auto target = static_cast<std::size_t>(
      std::llround(static_cast<double>(total) * weight_sum / denom));

  const std::size_t n = weights.size();
  std::vector<std::size_t> q(n);
  std::vector<double> remainder(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double share = static_cast<double>(total) * weights[i] / denom;
    double whole = std::floor(share);
    // Shares a rounding error below an integer count as that integer.
    if (share - whole > 1.0 - kSumTolerance) whole += 1.0;
    q[i] = static_cast<std::size_t>(whole);
    remainder[i] = std::max(0.0, share - whole);
    assigned += q[i];
  }

  // Quantize remainders so that shares equal up to rounding error tie exactly.
  std::vector<std::size_t> order = positions(n);
  auto key = [&](std::size_t i) { return std::llround(remainder[i] * 1e9); };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key(a) > key(b); });

  for (std::size_t k = 0; assigned < target && k < n; ++k) {
    ++q[order[k]];
    ++assigned;
  }
  // Snapping can overshoot the target by a unit; take it back from the smallest remainders.
  for (std::size_t k = n; assigned > target && k > 0; --k) {
    std::size_t i = order[k - 1];
    if (q[i] > 0) {
      --q[i];
      --assigned;
    }
  }
  return q;
}

void validate(const FedDatasetConfig& config, const Dataset& source) {
  if (config.n_nodes == 0) throw Error(ErrorCode::InvalidArgument, "n_nodes must be at least 1");
  const std::size_t n = config.n_nodes;

  if (config.node_ids) {
    check_length(config.node_ids->size(), n, "node_ids");
    std::set<std::string> seen;
    for (const auto& id : *config.node_ids) {
      if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateId, "node id '" + id + "' repeated");
    }
  }
  if (config.weights && config.weights_per_class) {
    throw Error(ErrorCode::ConflictingOptions, "weights and weights_per_class are mutually exclusive");
  }
  if (config.weights) {
    const auto& w = *config.weights;
    check_length(w.size(), n, "weights");
    for (std::size_t i = 0; i < n; ++i) check_fraction(w[i], "weights[" + std::to_string(i) + "]");
    if (!config.replacement && sum_of(w) > 1.0 + kSumTolerance) {
      throw Error(ErrorCode::InvalidWeights, "weights sum to " + format_real(sum_of(w)) +
                                                 " > 1 without replacement");
    }
  }
  if (config.weights_per_class) {
    if (!source.has_labels()) {
      throw Error(ErrorCode::LabelsRequired, "weights_per_class needs a labeled dataset");
    }
    if (!source.is_classification()) {
      throw Error(ErrorCode::LabelsRequired, "weights_per_class needs class (integer) labels");
    }
    const auto& m = *config.weights_per_class;
    check_length(m.size(), n, "weights_per_class");
    const std::size_t n_classes = summarize_labels(source).classes.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (m[i].size() != n_classes) {
        throw Error(ErrorCode::ClassCountMismatch,
                    "weights_per_class row " + std::to_string(i) + " has " +
                        std::to_string(m[i].size()) + " columns but the dataset has " +
                        std::to_string(n_classes) + " classes");
      }
      for (std::size_t c = 0; c < n_classes; ++c) {
        check_fraction(m[i][c], "weights_per_class[" + std::to_string(i) + "][" + std::to_string(c) + "]");
      }
    }
    if (!config.replacement) {
      for (std::size_t c = 0; c < n_classes; ++c) {
        double column = 0.0;
        for (std::size_t i = 0; i < n; ++i) column += m[i][c];
        if (column > 1.0 + kSumTolerance) {
          throw Error(ErrorCode::InvalidWeights, "weights_per_class column " + std::to_string(c) +
                                                     " sums to " + format_real(column) +
                                                     " > 1 without replacement");
        }
      }
    }
  }
  if (config.features_per_node) {
    check_length(config.features_per_node->size(), n, "features_per_node");
    std::size_t budget = std::accumulate(config.features_per_node->begin(),
                                         config.features_per_node->end(), std::size_t{0});
    if (budget > source.n_features()) {
      throw Error(ErrorCode::FeatureBudgetExceeded,
                  "features_per_node asks for " + std::to_string(budget) +
                      " features but the dataset has " + std::to_string(source.n_features()));
    }
  }
  if (config.keep_labels) check_length(config.keep_labels->size(), n, "keep_labels");
}

FedDataset from_config(const Dataset& source, const FedDatasetConfig& config) {
  validate(config, source);
  const std::size_t n_nodes = config.n_nodes;
  const std::uint64_t seed = config.seed;
  std::vector<std::vector<std::size_t>> rows(n_nodes);

  if (config.weights_per_class) {
    const auto& labels = source.class_labels();
    const auto classes = summarize_labels(source).classes;
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
      std::vector<std::size_t> members;
      for (std::size_t r = 0; r < labels.size(); ++r) {
        if (labels[r] == classes[ci]) members.push_back(r);
      }
      const std::uint64_t class_seed = derive_seed(seed, {kClassStream, ci});
      Rng rng(class_seed);
      rng.shuffle(members);

      std::vector<double> column(n_nodes);
      for (std::size_t i = 0; i < n_nodes; ++i) column[i] = (*config.weights_per_class)[i][ci];
      if (all_zero(column)) continue;

      if (!config.replacement) {
        assign_slices(members, apportion(members.size(), column), rows);
      } else {
        auto quotas = sum_of(column) <= 1.0 + kSumTolerance
                          ? apportion(members.size(), column)
                          : independent_quotas(members.size(), column);
        assign_draws(members, quotas, class_seed, rows);
      }
    }
  } else {
    const std::size_t total = source.n_samples();
    std::vector<std::size_t> all = positions(total);
    std::vector<double> weights = config.weights
                                      ? *config.weights
                                      : std::vector<double>(n_nodes, 1.0 / static_cast<double>(n_nodes));
    if (!all_zero(weights) && total > 0) {
      if (!config.replacement) {
        Rng rng(derive_seed(seed, {kRowStream}));
        rng.shuffle(all);
        assign_slices(all, apportion(total, weights), rows);
      } else {
        auto quotas = config.weights ? independent_quotas(total, weights) : apportion(total, weights);
        assign_draws(all, quotas, derive_seed(seed, {kRowStream, 1}), rows);
      }
    }
  }

  std::vector<std::vector<std::size_t>> cols(n_nodes);
  if (config.features_per_node) {
    auto features = positions(source.n_features());
    Rng rng(derive_seed(seed, {kFeatureStream}));
    rng.shuffle(features);
    assign_slices(features, *config.features_per_node, cols);
  } else {
    for (auto& c : cols) c = positions(source.n_features());
  }

  const auto ids = config.resolved_node_ids();
  FedDataset fed;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    std::sort(rows[i].begin(), rows[i].end());
    std::sort(cols[i].begin(), cols[i].end());
    bool keep = config.keep_labels ? (*config.keep_labels)[i] : true;
    fed.emplace(ids[i], source.subset(rows[i], cols[i], keep));
  }
  return fed;
}

std::vector<std::vector<double>> classes_to_weights(std::size_t n_nodes, std::size_t n_classes,
                                                    std::size_t classes_per_node,
                                                    std::uint64_t seed) {
  if (n_nodes == 0) throw Error(ErrorCode::InvalidArgument, "classes_to_weights needs n_nodes >= 1");
  if (classes_per_node < 1 || classes_per_node > n_classes) {
    throw Error(ErrorCode::InvalidArgument, "classes_per_node must lie in [1, n_classes]");
  }
  std::vector<std::vector<double>> m(n_nodes, std::vector<double>(n_classes, 0.0));
  const auto all_classes = positions(n_classes);
  Rng rng(seed);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    for (auto c : rng.sample(std::span<const std::size_t>(all_classes), classes_per_node)) m[i][c] = 1.0;
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    double column = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) column += m[i][c];
    if (column == 0.0) continue;
    for (std::size_t i = 0; i < n_nodes; ++i) m[i][c] /= column;
  }
  return m;
}

}  // namespace flexsim
