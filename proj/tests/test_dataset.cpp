#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "flexsim/dataset.hpp"
#include "flexsim/error.hpp"
#include "flexsim/learners.hpp"
#include "test_support.hpp"

using namespace flexsim;
namespace t = flexsim::testing;

TEST_CASE("from_arrays assigns identity ids") {
  Matrix m(4, 2, {1, 2, 3, 4, 5, 6, 7, 8});
  auto d = Dataset::from_arrays(m, Labels{ClassLabels{0, 1, 0, 1}});
  CHECK(d.n_samples() == 4);
  CHECK(d.n_features() == 2);
  CHECK(d.row_ids() == std::vector<std::int64_t>{0, 1, 2, 3});
  CHECK(d.feature_ids() == std::vector<std::int64_t>{0, 1});
  CHECK(d.is_classification());
}

TEST_CASE("from_arrays rejects mismatched labels and empty feature sets") {
  CHECK(t::error_code([] { Dataset::from_arrays(Matrix(3, 2), Labels{ClassLabels{0, 1}}); }) == ErrorCode::ShapeMismatch);
  CHECK(t::error_code([] { Dataset::from_arrays(Matrix(3, 0)); }) == ErrorCode::EmptyFeatures);
}

TEST_CASE("from_arrays accepts zero rows") {
  auto d = Dataset::from_arrays(Matrix(0, 5));
  CHECK(d.n_samples() == 0);
  CHECK(d.n_features() == 5);
  CHECK_FALSE(d.has_labels());
}

TEST_CASE("subset keeps ids as subsets of the original") {
  std::mt19937_64 gen(3);
  auto d = Dataset::from_arrays(t::random_matrix(gen, 10, 4), Labels{ClassLabels(10, 1)});
  std::vector<std::size_t> rows{1, 5, 9};
  std::vector<std::size_t> cols{3, 0};
  auto s = d.subset(rows, cols, true);
  CHECK(s.row_ids() == std::vector<std::int64_t>{1, 5, 9});
  CHECK(s.feature_ids() == std::vector<std::int64_t>{3, 0});
  CHECK(s.features()(2, 0) == d.features()(9, 3));
  // Ids survive a second cut.
  std::vector<std::size_t> again_rows{2};
  std::vector<std::size_t> again_cols{1};
  auto s2 = s.subset(again_rows, again_cols, false);
  CHECK(s2.row_ids() == std::vector<std::int64_t>{9});
  CHECK(s2.feature_ids() == std::vector<std::int64_t>{0});
  CHECK_FALSE(s2.has_labels());
}

TEST_CASE("summarize_labels counts sorted classes") {
  auto d = Dataset::from_arrays(Matrix(4, 1), Labels{ClassLabels{1, 0, 1, 1}});
  auto s = summarize_labels(d);
  CHECK(s.classes == std::vector<std::int64_t>{0, 1});
  CHECK(s.counts == std::vector<std::size_t>{1, 3});

  auto single = summarize_labels(Dataset::from_arrays(Matrix(1, 1), Labels{ClassLabels{7}}));
  CHECK(single.classes == std::vector<std::int64_t>{7});
  CHECK(single.counts == std::vector<std::size_t>{1});

  CHECK(t::error_code([] { summarize_labels(Dataset::from_arrays(Matrix(2, 1))); }) == ErrorCode::NoLabels);
}

TEST_CASE("load_csv with a label column") {
  auto dir = t::scratch_dir("csv_label");
  t::write_text(dir / "a.csv", "x0,x1,y\n1.5,2,0\n-3,4e-1,1\n5,6,1\n");
  auto d = load_csv(dir / "a.csv", {.label_column = "y", .has_header = true});
  CHECK(d.n_samples() == 3);
  CHECK(d.n_features() == 2);
  CHECK(d.is_classification());
  CHECK(d.class_labels() == ClassLabels{0, 1, 1});
  CHECK(d.features()(1, 1) == doctest::Approx(0.4));
}

TEST_CASE("load_csv label column in the middle and real-valued labels") {
  auto dir = t::scratch_dir("csv_mid");
  t::write_text(dir / "b.csv", "a,target,b\n1,0.5,2\n3,1.25,4\n");
  auto d = load_csv(dir / "b.csv", {.label_column = "target"});
  CHECK_FALSE(d.is_classification());
  CHECK(d.label_values() == std::vector<double>{0.5, 1.25});
  CHECK(d.features()(1, 0) == 3.0);
  CHECK(d.features()(1, 1) == 4.0);
}

TEST_CASE("load_csv without label column keeps every column") {
  auto dir = t::scratch_dir("csv_nolabel");
  t::write_text(dir / "c.csv", "x0,x1,y\n1,2,3\n4,5,6\n");
  auto d = load_csv(dir / "c.csv");
  CHECK(d.n_features() == 3);
  CHECK_FALSE(d.has_labels());
}

TEST_CASE("load_csv without header names columns by index") {
  auto dir = t::scratch_dir("csv_noheader");
  t::write_text(dir / "d.csv", "1,2,0\r\n3,4,1\r\n");
  auto d = load_csv(dir / "d.csv", {.label_column = "2", .has_header = false});
  CHECK(d.n_samples() == 2);
  CHECK(d.class_labels() == ClassLabels{0, 1});
}

TEST_CASE("load_csv errors") {
  auto dir = t::scratch_dir("csv_errors");
  t::write_text(dir / "bad.csv", "x0,x1\n1,2\n3,abc\n");
  try {
    load_csv(dir / "bad.csv");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  t::write_text(dir / "missing.csv", "x0,x1\n1,\n");
  CHECK(t::error_code([&] { load_csv(dir / "missing.csv"); }) == ErrorCode::ParseError);
  t::write_text(dir / "ragged.csv", "x0,x1\n1,2,3\n");
  CHECK(t::error_code([&] { load_csv(dir / "ragged.csv"); }) == ErrorCode::ParseError);
  CHECK(t::error_code([&] { load_csv(dir / "nope.csv"); }) == ErrorCode::IoError);
  t::write_text(dir / "ok.csv", "x0,x1\n1,2\n");
  CHECK(t::error_code([&] { load_csv(dir / "ok.csv", {.label_column = "y"}); }) == ErrorCode::MissingColumn);
}

TEST_CASE("write_csv then load_csv reproduces the dataset") {
  auto dir = t::scratch_dir("csv_roundtrip");
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 5; ++trial) {
    std::uniform_int_distribution<int> cls(0, 3);
    ClassLabels labels(25);
    for (auto& l : labels) l = cls(gen);
    auto d = Dataset::from_arrays(t::random_matrix(gen, 25, 3, 1e3), Labels{labels});
    write_csv(d, dir / "rt.csv");
    auto back = load_csv(dir / "rt.csv", {.label_column = "y"});
    CHECK(back == d);
  }
  auto regression = Dataset::from_arrays(t::random_matrix(gen, 6, 2), Labels{RealLabels{0.1, 0.2, 0.3, 1e-7, -2.5, 3.75}});
  write_csv(regression, dir / "rt2.csv");
  CHECK(load_csv(dir / "rt2.csv", {.label_column = "y"}) == regression);
}

TEST_CASE("generate_blobs is balanced and deterministic") {
  auto d = generate_blobs(1000, 2, 10, 5.0, 0);
  auto s = summarize_labels(d);
  REQUIRE(s.classes.size() == 10);
  for (auto c : s.counts) CHECK(c == 100);

  CHECK(generate_blobs(1000, 2, 10, 5.0, 0) == d);
  CHECK_FALSE(generate_blobs(1000, 2, 10, 5.0, 1) == d);

  auto uneven = summarize_labels(generate_blobs(1003, 3, 4, 1.0, 2));
  auto [lo, hi] = std::minmax_element(uneven.counts.begin(), uneven.counts.end());
  CHECK(*hi - *lo <= 1);
}

TEST_CASE("generate_blobs rejects bad arguments") {
  CHECK(t::error_code([] { generate_blobs(10, 2, 1, 1.0, 0); }) == ErrorCode::InvalidArgument);
  CHECK(t::error_code([] { generate_blobs(3, 2, 4, 1.0, 0); }) == ErrorCode::InvalidArgument);
  CHECK(t::error_code([] { generate_blobs(10, 2, 2, 0.0, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("generate_blobs class centers spread with the separation") {
  // Per-class means should sit roughly `separation` apart for two classes.
  for (double sep : {5.0, 20.0}) {
    auto d = generate_blobs(4000, 2, 2, sep, 4);
    double mean[2][2] = {{0, 0}, {0, 0}};
    double count[2] = {0, 0};
    for (std::size_t r = 0; r < d.n_samples(); ++r) {
      auto c = static_cast<std::size_t>(d.class_labels()[r]);
      mean[c][0] += d.features()(r, 0);
      mean[c][1] += d.features()(r, 1);
      count[c] += 1;
    }
    double dx = mean[0][0] / count[0] - mean[1][0] / count[1];
    double dy = mean[0][1] / count[0] - mean[1][1] / count[1];
    CHECK(std::hypot(dx, dy) == doctest::Approx(sep).epsilon(0.05));
  }
}

TEST_CASE("separable blobs are learnable by logistic regression") {
  // Recorded oracle run: this configuration reaches training accuracy 1.0.
  auto d = generate_blobs(1000, 2, 2, 10.0, 0);
  LearnerSpec spec{.kind = LearnerKind::LogisticRegression, .n_features = 2, .lr = 0.1, .epochs = 20, .batch_size = 32};
  auto p = train(spec, init_params(spec), d);
  CHECK(*evaluate(spec, p, d).accuracy >= 0.95);
}

TEST_CASE("train_test_split partitions the rows") {
  auto d = generate_blobs(101, 2, 2, 3.0, 1);
  auto [train, test] = train_test_split(d, 0.2, 9);
  CHECK(test.n_samples() == 20);
  CHECK(train.n_samples() == 81);
  std::set<std::int64_t> ids(train.row_ids().begin(), train.row_ids().end());
  for (auto id : test.row_ids()) CHECK_FALSE(ids.contains(id));
}
