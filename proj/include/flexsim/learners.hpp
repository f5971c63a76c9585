#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "flexsim/dataset.hpp"
#include "flexsim/param_vector.hpp"

namespace flexsim {

enum class LearnerKind { LinearRegression, LogisticRegression };

std::string_view to_string(LearnerKind kind);
/// Accepts "linear_regression" / "logistic_regression".
LearnerKind parse_learner_kind(std::string_view name);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::LogisticRegression;
  std::size_t n_features = 1;
  double l2 = 0.0;
  double lr = 0.1;
  std::size_t epochs = 1;
  std::size_t batch_size = 32;
  /// Drives batch shuffling only; parameters always start at zero.
  std::uint64_t seed = 0;

  bool operator==(const LearnerSpec&) const = default;
};

/// InvalidArgument on a malformed spec.
void validate(const LearnerSpec& spec);

/// Zero weights and bias, laid out as [w_0 .. w_{d-1}, bias].
ParamVector init_params(const LearnerSpec& spec);

struct LossAndGradient {
  double loss;
  ParamVector gradient;
};

/// Mean loss over `d` and its exact gradient. Linear regression uses squared
/// error, logistic regression binary cross-entropy on sigmoid scores; both add
/// (l2 / 2) * ||w||^2 with the bias left unregularized.
LossAndGradient loss_and_gradient(const LearnerSpec& spec, const ParamVector& p, const Dataset& d);

/// Mini-batch SGD. Each epoch visits the rows in an order shuffled by
/// (spec.seed, epoch); a batch at least as large as the dataset is plain
/// full-batch gradient descent in row order.
ParamVector train(const LearnerSpec& spec, ParamVector p, const Dataset& d);

struct Metrics {
  /// Mean squared error (linear) or mean cross-entropy (logistic), without the L2 term.
  double loss;
  /// Logistic only. A score of exactly 0.5 predicts class 1.
  std::optional<double> accuracy;
};

Metrics evaluate(const LearnerSpec& spec, const ParamVector& p, const Dataset& d);

}  // namespace flexsim
