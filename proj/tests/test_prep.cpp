#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qcluster/prep.hpp"
#include "qcluster/rng.hpp"
#include "qcluster/synthgen.hpp"

using namespace qcluster;

namespace {

QuestionnaireMatrix make_matrix(std::size_t items, const std::vector<std::string>& labels,
                                const std::vector<std::optional<double>>& values) {
  QuestionnaireMatrix m;
  m.n_rows = labels.size();
  m.n_items = items;
  m.group_labels = labels;
  m.values = values;
  return m;
}

}  // namespace

TEST_CASE("complete matrix passes through imputation unchanged") {
  auto m = make_matrix(2, {"a", "a", "b"}, {1.0, 2.0, 3.0, 4.0, 5.0, 1.0});
  auto result = knn_impute(m, 3);
  CHECK(result.matrix.values == m.values);
  CHECK(result.warnings.empty());
}

TEST_CASE("an exact-match neighbor donates its value") {
  auto m = make_matrix(4, {"a", "a", "a"},
                       {4.0, 4.0, std::nullopt, 4.0,
                        4.0, 4.0, 5.0, 4.0,
                        1.0, 1.0, 1.0, 1.0});
  auto result = knn_impute(m, 1);
  CHECK(*result.matrix.at(0, 2) == 5.0);
}

TEST_CASE("imputed value matches a brute-force distance sort") {
  // 5 x 3, one missing cell; the oracle sorts candidates by distance on the
  // observed coordinates and averages the two nearest donors.
  std::vector<std::optional<double>> values = {
      2.0, std::nullopt, 3.0,
      2.0, 5.0, 3.0,
      1.0, 4.0, 5.0,
      2.0, 1.0, 4.0,
      5.0, 2.0, 3.0};
  auto m = make_matrix(3, {"a", "a", "a", "b", "b"}, values);

  struct Candidate { double dist2; std::size_t row; };
  std::vector<Candidate> cands;
  for (std::size_t r = 1; r < 5; ++r) {
    double dx = *m.at(r, 0) - 2.0, dz = *m.at(r, 2) - 3.0;
    cands.push_back({dx * dx + dz * dz, r});
  }
  std::sort(cands.begin(), cands.end(), [](auto a, auto b) {
    return a.dist2 != b.dist2 ? a.dist2 < b.dist2 : a.row < b.row;
  });
  double expected = (*m.at(cands[0].row, 1) + *m.at(cands[1].row, 1)) / 2.0;

  auto result = knn_impute(m, 2);
  CHECK(*result.matrix.at(0, 1) == doctest::Approx(expected).epsilon(1e-12));
  // observed cells untouched
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 3; ++c)
      if (r != 0 || c != 1) CHECK(*result.matrix.at(r, c) == *values[r * 3 + c]);
}

TEST_CASE("distance ties break toward the lower row index") {
  // rows 1 and 2 are equidistant from row 0; k = 1 must take row 1
  auto m = make_matrix(2, {"a", "a", "a"},
                       {3.0, std::nullopt,
                        4.0, 1.0,
                        2.0, 5.0});
  auto result = knn_impute(m, 1);
  CHECK(*result.matrix.at(0, 1) == 1.0);
}

TEST_CASE("a fully missing row is a hard error") {
  auto m = make_matrix(2, {"a", "a"}, {std::nullopt, std::nullopt, 1.0, 2.0});
  CHECK_THROWS_WITH_AS(knn_impute(m, 1), doctest::Contains("row 0"), input_error);
}

TEST_CASE("fewer candidates than k warns and uses what exists") {
  auto m = make_matrix(2, {"a", "a"}, {1.0, std::nullopt, 2.0, 4.0});
  auto result = knn_impute(m, 5);
  CHECK(*result.matrix.at(0, 1) == 4.0);
  REQUIRE(result.warnings.size() == 1);
  CHECK(result.warnings[0].find("only 1 of 5") != std::string::npos);
}

TEST_CASE("zero eligible candidates is a hard error") {
  // the only other row is missing on the query's observed coordinate
  auto m = make_matrix(2, {"a", "a"}, {1.0, std::nullopt, std::nullopt, 4.0});
  CHECK_THROWS_AS(knn_impute(m, 1), input_error);
}

TEST_CASE("balanced input comes back without duplicates") {
  auto m = make_matrix(1, {"a", "b", "a", "b"}, {1.0, 2.0, 3.0, 4.0});
  PreparedMatrix out = balance_groups(m, 7);
  CHECK(out.n_rows == 4);
  CHECK(std::count(out.oversampled.begin(), out.oversampled.end(), 1) == 0);
  for (std::size_t r = 0; r < 4; ++r) CHECK(out.at(r, 0) == *m.at(r, 0));
}

TEST_CASE("smaller group is topped up with copies of its own rows") {
  auto m = make_matrix(1, {"a", "a", "a", "b", "b", "b", "b", "b"},
                       {1.0, 2.0, 3.0, 4.0, 5.0, 4.0, 5.0, 4.0});
  PreparedMatrix out = balance_groups(m, 3);
  CHECK(out.n_rows == 10);
  CHECK(std::count(out.oversampled.begin(), out.oversampled.end(), 1) == 2);
  for (std::size_t r = 8; r < 10; ++r) {
    CHECK(out.group_labels[r] == "a");
    CHECK((out.at(r, 0) == 1.0 || out.at(r, 0) == 2.0 || out.at(r, 0) == 3.0));
  }
}

TEST_CASE("oversampling picks minority rows uniformly") {
  // 10-row minority against a 1000-row majority: 990 draws, each row has
  // expectation 99 with 3-sigma band ~28
  QuestionnaireMatrix m;
  m.n_items = 1;
  for (int i = 0; i < 10; ++i) {
    m.values.emplace_back(double(i));
    m.group_labels.push_back("small");
  }
  for (int i = 0; i < 1000; ++i) {
    m.values.emplace_back(42.0);
    m.group_labels.push_back("big");
  }
  m.n_rows = 1010;
  PreparedMatrix out = balance_groups(m, 11);
  std::vector<int> hits(10, 0);
  for (std::size_t r = 0; r < out.n_rows; ++r) {
    if (out.oversampled[r]) ++hits[static_cast<int>(out.at(r, 0))];
  }
  double expected = 99.0, band = 3.0 * std::sqrt(990 * 0.1 * 0.9);
  for (int h : hits) CHECK(std::abs(h - expected) < band);
}

TEST_CASE("zero-sd augmentation is the identity") {
  auto m = make_matrix(1, {"a", "b"}, {1.0, 2.0});
  PreparedMatrix balanced = balance_groups(m, 0);
  PreparedMatrix out = augment(balanced, 0.0, 5);
  CHECK(out.values == balanced.values);
}

TEST_CASE("augmentation noise has the configured variance") {
  const std::size_t n = 100000;
  PreparedMatrix m;
  m.n_rows = n;
  m.n_items = 1;
  m.values.assign(n, 3.0);
  m.group_labels.assign(n, "a");
  m.oversampled.assign(n, 0);
  PreparedMatrix out = augment(m, 0.1, 17);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double d = out.values[r] - 3.0;
    sum += d;
    sum2 += d * d;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::abs(var - 0.01) < 0.0005);
  CHECK(std::abs(mean) < 0.002);
}

TEST_CASE("prepared preset rows are pairwise distinct and inside the sanity band") {
  QuestionnaireMatrix d1 = generate_dataset(preset_dataset("d1", 1));
  PrepResult prep = prepare(d1, PrepConfig{5, 0.1, 1});
  const auto& pm = prep.prepared;
  for (double v : pm.values) {
    CHECK(v >= d1.scale_min - 1.0);
    CHECK(v <= d1.scale_max + 1.0);
  }
  std::vector<std::size_t> order(pm.n_rows);
  for (std::size_t i = 0; i < pm.n_rows; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(
        pm.values.begin() + a * pm.n_items, pm.values.begin() + (a + 1) * pm.n_items,
        pm.values.begin() + b * pm.n_items, pm.values.begin() + (b + 1) * pm.n_items);
  });
  for (std::size_t i = 0; i + 1 < pm.n_rows; ++i) {
    bool same = std::equal(pm.values.begin() + order[i] * pm.n_items,
                           pm.values.begin() + (order[i] + 1) * pm.n_items,
                           pm.values.begin() + order[i + 1] * pm.n_items);
    CHECK_FALSE(same);
  }
}

TEST_CASE("pipeline composition returns both matrices") {
  auto m = make_matrix(2, {"a", "a", "b"}, {1.0, 2.0, 2.0, 1.0, 4.0, 5.0});
  PrepResult result = prepare(m, PrepConfig{2, 0.0, 9});
  CHECK(result.imputed.values == m.values);
  CHECK(result.prepared.n_rows == 4);  // groups balanced to 2 each
  // sd = 0: prepared values are a real-valued copy of the balanced matrix
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(result.prepared.at(r, c) == *m.at(r, c));
}

TEST_CASE("imputation changes only the blanked cell on a preset") {
  QuestionnaireMatrix d1 = generate_dataset(preset_dataset("d1", 3));
  QuestionnaireMatrix blanked = d1;
  blanked.at(123, 4) = std::nullopt;
  PrepResult result = prepare(blanked, PrepConfig{5, 0.1, 3});
  std::size_t diffs = 0;
  for (std::size_t i = 0; i < d1.values.size(); ++i) {
    if (result.imputed.values[i] != d1.values[i]) ++diffs;
  }
  CHECK(diffs == 1);
  CHECK(result.imputed.at(123, 4).has_value());
}

TEST_CASE("column means survive augmentation in expectation") {
  QuestionnaireMatrix d1 = generate_dataset(preset_dataset("d1", 5));
  PrepResult result = prepare(d1, PrepConfig{5, 0.1, 5});
  const auto& pm = result.prepared;
  PreparedMatrix balanced = balance_groups(d1, 5);
  for (std::size_t c = 0; c < pm.n_items; ++c) {
    double before = 0.0, after = 0.0;
    for (std::size_t r = 0; r < pm.n_rows; ++r) {
      before += balanced.at(r, c);
      after += pm.at(r, c);
    }
    // sd 0.1 over 4000 rows: the mean shift concentrates at ~0.1/63
    CHECK(std::abs(after - before) / pm.n_rows < 0.01);
  }
}
