#include "flexsim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "flexsim/error.hpp"
#include "flexsim/random.hpp"

namespace flexsim {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::ShapeMismatch, "matrix data length " + std::to_string(data_.size()) +
                                              " does not match " + std::to_string(rows_) + "x" +
                                              std::to_string(cols_));
  }
}

namespace {

std::size_t label_count(const Labels& labels) {
  return std::visit([](const auto& v) { return v.size(); }, labels);
}

std::vector<std::int64_t> iota_ids(std::size_t n) {
  std::vector<std::int64_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::int64_t{0});
  return ids;
}

}  // namespace

Dataset Dataset::from_arrays(Matrix features, std::optional<Labels> labels) {
  if (features.cols() == 0) {
    throw Error(ErrorCode::EmptyFeatures, "dataset needs at least one feature column");
  }
  if (labels && label_count(*labels) != features.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "labels length " + std::to_string(label_count(*labels)) +
                                              " does not match row count " +
                                              std::to_string(features.rows()));
  }
  Dataset d;
  d.row_ids_ = iota_ids(features.rows());
  d.feature_ids_ = iota_ids(features.cols());
  d.features_ = std::move(features);
  d.labels_ = std::move(labels);
  return d;
}

bool Dataset::is_classification() const noexcept {
  return labels_ && std::holds_alternative<ClassLabels>(*labels_);
}

const ClassLabels& Dataset::class_labels() const {
  if (!labels_) throw Error(ErrorCode::NoLabels, "dataset has no labels");
  if (const auto* classes = std::get_if<ClassLabels>(&*labels_)) return *classes;
  throw Error(ErrorCode::BadLabels, "dataset has real-valued (regression) labels");
}

std::vector<double> Dataset::label_values() const {
  if (!labels_) throw Error(ErrorCode::NoLabels, "dataset has no labels");
  return std::visit(
      [](const auto& v) { return std::vector<double>(v.begin(), v.end()); }, *labels_);
}

Dataset Dataset::subset(std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                        bool keep_labels) const {
  Matrix m(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto src = features_.row(rows[r]);
    for (std::size_t c = 0; c < cols.size(); ++c) m(r, c) = src[cols[c]];
  }
  Dataset d;
  d.features_ = std::move(m);
  d.row_ids_.reserve(rows.size());
  for (auto r : rows) d.row_ids_.push_back(row_ids_[r]);
  d.feature_ids_.reserve(cols.size());
  for (auto c : cols) d.feature_ids_.push_back(feature_ids_[c]);
  if (keep_labels && labels_) {
    d.labels_ = std::visit(
        [&](const auto& v) -> Labels {
          std::remove_cvref_t<decltype(v)> out;
          out.reserve(rows.size());
          for (auto r : rows) out.push_back(v[r]);
          return out;
        },
        *labels_);
  }
  return d;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::size_t> cols(n_features());
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return subset(rows, cols, true);
}

Dataset Dataset::without_labels() const {
  Dataset d = *this;
  d.labels_.reset();
  return d;
}

Dataset Dataset::with_labels(Labels labels) const {
  if (label_count(labels) != n_samples()) {
    throw Error(ErrorCode::ShapeMismatch, "replacement labels length " +
                                              std::to_string(label_count(labels)) +
                                              " does not match row count " +
                                              std::to_string(n_samples()));
  }
  Dataset d = *this;
  d.labels_ = std::move(labels);
  return d;
}

LabelSummary summarize_labels(const Dataset& d) {
  if (!d.has_labels()) throw Error(ErrorCode::NoLabels, "cannot summarize an unlabeled dataset");
  std::map<std::int64_t, std::size_t> counts;
  if (d.is_classification()) {
    for (auto label : d.class_labels()) ++counts[label];
  } else {
    for (double v : d.label_values()) {
      if (v != std::floor(v)) {
        throw Error(ErrorCode::BadLabels, "regression labels have no class summary");
      }
      ++counts[static_cast<std::int64_t>(v)];
    }
  }
  LabelSummary s;
  for (const auto& [label, count] : counts) {
    s.classes.push_back(label);
    s.counts.push_back(count);
  }
  return s;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_real(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");

  std::vector<std::string> names;
  std::string line;
  std::size_t line_no = 0;
  std::size_t n_cols = 0;

  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  bool have_first = next_line();
  if (options.has_header) {
    if (!have_first) throw Error(ErrorCode::ParseError, "'" + path.string() + "' has no header row");
    for (auto cell : split_cells(line)) names.emplace_back(cell);
    n_cols = names.size();
    have_first = next_line();
  } else if (have_first) {
    n_cols = split_cells(line).size();
    for (std::size_t c = 0; c < n_cols; ++c) names.push_back(std::to_string(c));
  }

  std::optional<std::size_t> label_col;
  if (options.label_column) {
    auto it = std::find(names.begin(), names.end(), *options.label_column);
    if (it == names.end()) {
      throw Error(ErrorCode::MissingColumn,
                  "label column '" + *options.label_column + "' not found in '" + path.string() + "'");
    }
    label_col = static_cast<std::size_t>(it - names.begin());
  }
  std::size_t n_features = n_cols - (label_col ? 1 : 0);
  if (n_features == 0) throw Error(ErrorCode::EmptyFeatures, "'" + path.string() + "' has no feature columns");

  std::vector<double> values;
  std::vector<double> label_values;
  std::size_t data_row = 0;
  for (bool more = have_first; more; more = next_line()) {
    ++data_row;
    auto cells = split_cells(line);
    if (cells.size() != n_cols) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(data_row) + " (line " +
                                             std::to_string(line_no) + ") has " +
                                             std::to_string(cells.size()) + " cells, expected " +
                                             std::to_string(n_cols));
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      auto value = parse_real(cells[c]);
      if (!value) {
        throw Error(ErrorCode::ParseError, "row " + std::to_string(data_row) + " (line " +
                                               std::to_string(line_no) + "), column '" + names[c] +
                                               "': cannot parse '" + std::string(cells[c]) +
                                               "' as a number");
      }
      if (label_col && c == *label_col) {
        label_values.push_back(*value);
      } else {
        values.push_back(*value);
      }
    }
  }

  Matrix features(data_row, n_features, std::move(values));
  if (!label_col) return Dataset::from_arrays(std::move(features));

  constexpr double kMaxExactInt = 9007199254740992.0;  // 2^53
  bool integral = std::all_of(label_values.begin(), label_values.end(), [](double v) {
    return v == std::floor(v) && std::abs(v) <= kMaxExactInt;
  });
  if (integral) {
    ClassLabels classes(label_values.begin(), label_values.end());
    return Dataset::from_arrays(std::move(features), Labels{std::move(classes)});
  }
  return Dataset::from_arrays(std::move(features), Labels{std::move(label_values)});
}

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  for (std::size_t c = 0; c < d.n_features(); ++c) {
    if (c) out << ',';
    out << 'x' << d.feature_ids()[c];
  }
  std::vector<std::string> labels;
  if (d.has_labels()) {
    out << ",y";
    std::visit(
        [&](const auto& v) {
          for (auto x : v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, double>) {
              labels.push_back(format_real(x));
            } else {
              labels.push_back(std::to_string(x));
            }
          }
        },
        *d.labels());
  }
  out << '\n';
  for (std::size_t r = 0; r < d.n_samples(); ++r) {
    auto row = d.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_real(row[c]);
    }
    if (d.has_labels()) out << ',' << labels[r];
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Synthetic data

Dataset generate_blobs(std::size_t n_samples, std::size_t n_features, std::size_t n_classes,
                       double class_separation, std::uint64_t seed) {
  if (n_classes < 2) throw Error(ErrorCode::InvalidArgument, "generate_blobs needs n_classes >= 2");
  if (n_samples < n_classes) {
    throw Error(ErrorCode::InvalidArgument, "generate_blobs needs n_samples >= n_classes");
  }
  if (!(class_separation > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "generate_blobs needs class_separation > 0");
  }
  if (n_features == 0) throw Error(ErrorCode::EmptyFeatures, "generate_blobs needs n_features >= 1");

  // Unit-spaced centers, scaled by the separation below.
  Matrix centers(n_classes, n_features);
  if (n_features == 1) {
    for (std::size_t c = 0; c < n_classes; ++c) centers(c, 0) = static_cast<double>(c);
  } else {
    double angle_step = 2.0 * std::numbers::pi / static_cast<double>(n_classes);
    double radius = 0.5 / std::sin(std::numbers::pi / static_cast<double>(n_classes));
    for (std::size_t c = 0; c < n_classes; ++c) {
      centers(c, 0) = radius * std::cos(angle_step * static_cast<double>(c));
      centers(c, 1) = radius * std::sin(angle_step * static_cast<double>(c));
    }
  }

  std::vector<std::int64_t> classes(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) classes[i] = static_cast<std::int64_t>(i % n_classes);
  Rng rng(derive_seed(seed, {0}));
  rng.shuffle(classes);

  Rng noise(derive_seed(seed, {1}));
  Matrix features(n_samples, n_features);
  for (std::size_t i = 0; i < n_samples; ++i) {
    auto c = static_cast<std::size_t>(classes[i]);
    for (std::size_t j = 0; j < n_features; ++j) {
      features(i, j) = class_separation * centers(c, j) + noise.normal();
    }
  }
  return Dataset::from_arrays(std::move(features), Labels{std::move(classes)});
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "test fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> order(d.n_samples());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(d.n_samples())));
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {d.select_rows(train), d.select_rows(test)};
}

}  // namespace flexsim
