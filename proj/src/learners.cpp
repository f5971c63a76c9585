#include "flexsim/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flexsim/error.hpp"
#include "flexsim/random.hpp"

namespace flexsim {

void check_param_vector(const ParamVector& p) {
  if (p.values.empty()) throw Error(ErrorCode::InvalidArgument, "parameter vector is empty");
  for (double v : p.values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "parameter vector '" + p.shape_tag + "' has a non-finite entry");
    }
  }
}

void check_combinable(const ParamVector& a, const ParamVector& b) {
  if (!a.combinable_with(b)) {
    throw Error(ErrorCode::ShapeMismatch, "cannot combine '" + a.shape_tag + "' (" +
                                              std::to_string(a.size()) + ") with '" + b.shape_tag +
                                              "' (" + std::to_string(b.size()) + ")");
  }
}

double l2_norm(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::LinearRegression: return "linear_regression";
    case LearnerKind::LogisticRegression: return "logistic_regression";
  }
  return "?";
}

LearnerKind parse_learner_kind(std::string_view name) {
  if (name == "linear_regression") return LearnerKind::LinearRegression;
  if (name == "logistic_regression") return LearnerKind::LogisticRegression;
  throw Error(ErrorCode::InvalidArgument, "unknown learner kind '" + std::string(name) + "'");
}

void validate(const LearnerSpec& spec) {
  if (spec.n_features == 0) throw Error(ErrorCode::InvalidArgument, "learner n_features must be >= 1");
  if (!(spec.l2 >= 0.0) || !std::isfinite(spec.l2)) {
    throw Error(ErrorCode::InvalidArgument, "learner l2 must be a finite nonnegative real");
  }
  if (!(spec.lr > 0.0) || !std::isfinite(spec.lr)) {
    throw Error(ErrorCode::InvalidArgument, "learner lr must be a finite positive real");
  }
  if (spec.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "learner batch_size must be >= 1");
}

namespace {

std::string shape_tag_for(const LearnerSpec& spec) {
  const char* prefix = spec.kind == LearnerKind::LinearRegression ? "linear:" : "logistic:";
  return prefix + std::to_string(spec.n_features) + "+1";
}

void check_shapes(const LearnerSpec& spec, const ParamVector& p, const Dataset& d) {
  if (p.shape_tag != shape_tag_for(spec) || p.size() != spec.n_features + 1) {
    throw Error(ErrorCode::ShapeMismatch, "parameters '" + p.shape_tag + "' do not fit learner '" +
                                              shape_tag_for(spec) + "'");
  }
  if (d.n_features() != spec.n_features) {
    throw Error(ErrorCode::ShapeMismatch, "dataset has " + std::to_string(d.n_features()) +
                                              " features, learner expects " +
                                              std::to_string(spec.n_features));
  }
}

// Labels as regression targets, checked against the learner kind.
std::vector<double> targets_for(const LearnerSpec& spec, const Dataset& d) {
  if (!d.has_labels()) throw Error(ErrorCode::NoLabels, "learner needs a labeled dataset");
  if (spec.kind == LearnerKind::LinearRegression) return d.label_values();
  if (!d.is_classification()) {
    throw Error(ErrorCode::BadLabels, "logistic regression needs class labels in {0, 1}");
  }
  const auto& classes = d.class_labels();
  std::vector<double> y(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] != 0 && classes[i] != 1) {
      throw Error(ErrorCode::BadLabels, "logistic regression needs labels in {0, 1}, found " +
                                            std::to_string(classes[i]));
    }
    y[i] = static_cast<double>(classes[i]);
  }
  return y;
}

double score(std::span<const double> params, std::span<const double> x) {
  double z = params.back();
  for (std::size_t j = 0; j < x.size(); ++j) z += params[j] * x[j];
  return z;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// Mean data loss and its gradient over the given rows, plus the L2 term.
double batch_loss_gradient(const LearnerSpec& spec, std::span<const double> params, const Dataset& d,
                           std::span<const double> y, std::span<const std::size_t> rows,
                           std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  const std::size_t n_w = spec.n_features;
  double loss = 0.0;
  for (auto r : rows) {
    auto x = d.row(r);
    double z = score(params, x);
    double residual = 0.0;
    if (spec.kind == LearnerKind::LinearRegression) {
      double err = z - y[r];
      loss += err * err;
      residual = 2.0 * err;
    } else {
      loss += softplus(z) - y[r] * z;
      residual = sigmoid(z) - y[r];
    }
    for (std::size_t j = 0; j < n_w; ++j) grad[j] += residual * x[j];
    grad[n_w] += residual;
  }
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  loss *= inv_n;
  for (double& g : grad) g *= inv_n;

  if (spec.l2 > 0.0) {
    double sq = 0.0;
    for (std::size_t j = 0; j < n_w; ++j) {
      sq += params[j] * params[j];
      grad[j] += spec.l2 * params[j];
    }
    loss += 0.5 * spec.l2 * sq;
  }
  return loss;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

ParamVector init_params(const LearnerSpec& spec) {
  validate(spec);
  return ParamVector{std::vector<double>(spec.n_features + 1, 0.0), shape_tag_for(spec)};
}

LossAndGradient loss_and_gradient(const LearnerSpec& spec, const ParamVector& p, const Dataset& d) {
  validate(spec);
  check_shapes(spec, p, d);
  auto y = targets_for(spec, d);
  if (d.n_samples() == 0) throw Error(ErrorCode::EmptyDataset, "mean loss of an empty dataset");
  ParamVector grad{std::vector<double>(p.size(), 0.0), p.shape_tag};
  double loss = batch_loss_gradient(spec, p.values, d, y, all_rows(d.n_samples()), grad.values);
  return {loss, std::move(grad)};
}

ParamVector train(const LearnerSpec& spec, ParamVector p, const Dataset& d) {
  validate(spec);
  check_shapes(spec, p, d);
  auto y = targets_for(spec, d);
  if (spec.epochs == 0) return p;
  const std::size_t n = d.n_samples();
  if (n == 0) throw Error(ErrorCode::EmptyDataset, "cannot train on an empty dataset");

  std::vector<double> grad(p.size());
  std::vector<std::size_t> order = all_rows(n);
  const bool full_batch = spec.batch_size >= n;
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    if (!full_batch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(derive_seed(spec.seed, {epoch}));
      rng.shuffle(order);
    }
    for (std::size_t start = 0; start < n; start += spec.batch_size) {
      std::size_t stop = std::min(n, start + spec.batch_size);
      std::span<const std::size_t> batch(order.data() + start, stop - start);
      batch_loss_gradient(spec, p.values, d, y, batch, grad);
      for (std::size_t j = 0; j < grad.size(); ++j) p.values[j] -= spec.lr * grad[j];
    }
  }
  return p;
}

Metrics evaluate(const LearnerSpec& spec, const ParamVector& p, const Dataset& d) {
  validate(spec);
  check_shapes(spec, p, d);
  auto y = targets_for(spec, d);
  if (d.n_samples() == 0) throw Error(ErrorCode::EmptyDataset, "cannot evaluate on an empty dataset");

  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < d.n_samples(); ++r) {
    double z = score(p.values, d.row(r));
    if (spec.kind == LearnerKind::LinearRegression) {
      loss += (z - y[r]) * (z - y[r]);
    } else {
      loss += softplus(z) - y[r] * z;
      double predicted = sigmoid(z) >= 0.5 ? 1.0 : 0.0;
      if (predicted == y[r]) ++correct;
    }
  }
  const double n = static_cast<double>(d.n_samples());
  Metrics m{loss / n, std::nullopt};
  if (spec.kind == LearnerKind::LogisticRegression) m.accuracy = static_cast<double>(correct) / n;
  return m;
}

}  // namespace flexsim
