#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace flexsim {

/// Dense row-major matrix of reals.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using ClassLabels = std::vector<std::int64_t>;
using RealLabels = std::vector<double>;
/// Integer labels mean classification, real labels mean regression.
using Labels = std::variant<ClassLabels, RealLabels>;

struct LabelSummary {
  std::vector<std::int64_t> classes;
  std::vector<std::size_t> counts;
};

/// Feature matrix, optional labels and the row/column ids the data had in the
/// dataset it was cut from. Immutable once built.
class Dataset {
 public:
  static Dataset from_arrays(Matrix features, std::optional<Labels> labels = std::nullopt);

  std::size_t n_samples() const noexcept { return features_.rows(); }
  std::size_t n_features() const noexcept { return features_.cols(); }

  const Matrix& features() const noexcept { return features_; }
  std::span<const double> row(std::size_t i) const { return features_.row(i); }

  bool has_labels() const noexcept { return labels_.has_value(); }
  bool is_classification() const noexcept;
  const std::optional<Labels>& labels() const noexcept { return labels_; }

  /// Classification labels; NoLabels if absent, BadLabels if the labels are real-valued.
  const ClassLabels& class_labels() const;
  /// Labels of either kind converted to reals; NoLabels if absent.
  std::vector<double> label_values() const;

  const std::vector<std::int64_t>& row_ids() const noexcept { return row_ids_; }
  const std::vector<std::int64_t>& feature_ids() const noexcept { return feature_ids_; }

  /// Sub-dataset of the given row and column positions (positions, not ids).
  /// Ids are carried over, so the result stays traceable to the original.
  Dataset subset(std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                 bool keep_labels = true) const;
  Dataset select_rows(std::span<const std::size_t> rows) const;
  Dataset without_labels() const;
  /// Same rows and ids with replacement labels (length must match).
  Dataset with_labels(Labels labels) const;

  bool operator==(const Dataset&) const = default;

 private:
  Dataset() = default;

  Matrix features_;
  std::optional<Labels> labels_;
  std::vector<std::int64_t> row_ids_;
  std::vector<std::int64_t> feature_ids_;
};

LabelSummary summarize_labels(const Dataset& d);

struct CsvOptions {
  /// Name of the label column. Without a header row, columns are named by
  /// their zero-based index ("0", "1", ...).
  std::optional<std::string> label_column;
  bool has_header = true;
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Writes features (and labels as a trailing "y" column) with a header row of
/// "x<feature_id>" names. Reals use the shortest round-trip representation.
void write_csv(const Dataset& d, const std::filesystem::path& path);

/// Isotropic unit-variance Gaussian blobs. Class centers sit on a regular
/// polygon (a line in one dimension) whose adjacent vertices are
/// `class_separation` apart. Rows are shuffled; class counts differ by at most one.
Dataset generate_blobs(std::size_t n_samples, std::size_t n_features, std::size_t n_classes,
                       double class_separation, std::uint64_t seed);

/// Splits rows into (train, test) with `test_fraction` of rows (rounded) held out.
std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double test_fraction,
                                             std::uint64_t seed);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_real(double value);

}  // namespace flexsim
