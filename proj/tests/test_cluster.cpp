#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "qcluster/cluster.hpp"
#include "qcluster/rng.hpp"

using namespace qcluster;

namespace {

GapCurve curve_from_gaps(const std::vector<double>& gaps, double s = 0.0) {
  GapCurve c;
  c.n_refs = 1;
  for (std::size_t i = 0; i < gaps.size(); ++i) c.points.push_back({i + 1, 0.0, gaps[i], gaps[i], s});
  return c;
}

void check_same_tree(const Dendrogram& got, const Dendrogram& want, double tol) {
  REQUIRE(got.merges.size() == want.merges.size());
  for (std::size_t i = 0; i < got.merges.size(); ++i) {
    CHECK(got.merges[i].cost == doctest::Approx(want.merges[i].cost).epsilon(tol));
  }
  for (std::size_t k = 1; k <= got.n_leaves; ++k) {
    CHECK(oracle::partition_at(got, k) == oracle::partition_at(want, k));
  }
}

}  // namespace

TEST_CASE("merge cost formula on singletons and weighted clusters") {
  std::vector<double> a{0.0, 0.0}, b{3.0, 0.0};
  CHECK(ward_delta(1, a, 1, b) == doctest::Approx(4.5));
  CHECK(ward_delta(4, a, 9, a) == 0.0);
  std::vector<double> c{2.0};
  std::vector<double> e{4.0};  // squared distance 4
  CHECK(ward_delta(2, c, 6, e) == doctest::Approx(6.0));
  CHECK_THROWS_AS(ward_delta(1, a, 1, c), input_error);
  CHECK_THROWS_AS(ward_delta(0, a, 1, b), input_error);
}

TEST_CASE("two points merge at half the squared distance") {
  std::vector<double> pts{0.0, 0.0, 0.0, 4.0};  // distance 4 in 2-d
  Dendrogram d = agglomerate(view_of(pts, 2, 2));
  REQUIRE(d.merges.size() == 1);
  CHECK(d.merges[0].cost == doctest::Approx(8.0));
  CHECK(d.merges[0].left == 0);
  CHECK(d.merges[0].right == 1);
  CHECK(d.merges[0].size == 2);
}

TEST_CASE("rectangle corners: short sides merge first") {
  // corners of a 1 x 10 rectangle
  std::vector<double> pts{0, 0, 1, 0, 0, 10, 1, 10};
  Dendrogram d = agglomerate(view_of(pts, 4, 2));
  auto parts = oracle::partition_at(d, 2);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0] == std::vector<std::size_t>{0, 1});
  CHECK(parts[1] == std::vector<std::size_t>{2, 3});
  check_same_tree(d, oracle::naive_ward(view_of(pts, 4, 2)), 1e-12);
}

TEST_CASE("agglomeration rejects fewer than two points") {
  std::vector<double> pts{1.0};
  CHECK_THROWS_AS(agglomerate(view_of(pts, 1, 1)), input_error);
}

TEST_CASE("chain agglomeration matches the recompute-all-pairs oracle") {
  RngStream sizes(404);
  for (int inst = 0; inst < 30; ++inst) {
    std::size_t n = 2 + sizes.next_below(40);
    std::size_t dim = 1 + sizes.next_below(7);
    auto pts = oracle::random_points(n, dim, 1.0, 5.0, 1000 + inst);
    MatrixView view = view_of(pts, n, dim);
    check_same_tree(agglomerate(view), oracle::naive_ward(view), 1e-9);
  }
}

TEST_CASE("merge costs never decrease and duplicates are handled") {
  // duplicated points force zero-cost ties
  std::vector<double> pts{1, 1, 1, 2, 2, 2, 1, 1, 2, 2, 5, 5};
  Dendrogram d = agglomerate(view_of(pts, 6, 2));
  for (std::size_t i = 0; i + 1 < d.merges.size(); ++i)
    CHECK(d.merges[i].cost <= d.merges[i + 1].cost);
  CHECK(d.merges[0].cost == 0.0);
  CHECK(d.merges.back().size == 6);
}

TEST_CASE("row permutation leaves every partition unchanged") {
  const std::size_t n = 24, dim = 3;
  auto pts = oracle::random_points(n, dim, 0.0, 1.0, 77);
  Dendrogram base = agglomerate(view_of(pts, n, dim));

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RngStream rng(123);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.next_below(i)]);
  std::vector<double> shuffled(n * dim);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < dim; ++c) shuffled[r * dim + c] = pts[perm[r] * dim + c];
  Dendrogram moved = agglomerate(view_of(shuffled, n, dim));

  for (std::size_t k = 1; k <= n; ++k) {
    auto a = oracle::partition_at(base, k);
    auto b = oracle::partition_at(moved, k);
    // map shuffled row ids back to originals before comparing
    for (auto& cluster : b) {
      for (auto& row : cluster) row = perm[row];
      std::sort(cluster.begin(), cluster.end());
    }
    std::sort(b.begin(), b.end());
    std::sort(a.begin(), a.end());
    CHECK(a == b);
  }
}

TEST_CASE("cut extremes: all singletons and the grand mean") {
  const std::size_t n = 12, dim = 2;
  auto pts = oracle::random_points(n, dim, 0.0, 4.0, 5);
  MatrixView view = view_of(pts, n, dim);
  Dendrogram d = agglomerate(view);

  ClusterAssignment singletons = cut(d, view, n);
  CHECK(singletons.within_dispersion == doctest::Approx(0.0));
  CHECK(singletons.centroids.size() == n);

  ClusterAssignment whole = cut(d, view, 1);
  std::vector<double> mean(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < dim; ++c) mean[c] += pts[r * dim + c] / n;
  for (std::size_t c = 0; c < dim; ++c)
    CHECK(whole.centroids[0][c] == doctest::Approx(mean[c]).epsilon(1e-9));

  CHECK_THROWS_AS(cut(d, view, 0), input_error);
  CHECK_THROWS_AS(cut(d, view, n + 1), input_error);
}

TEST_CASE("cut centroids equal member means and dispersion identities hold") {
  const std::size_t n = 40, dim = 4;
  auto pts = oracle::random_points(n, dim, 1.0, 5.0, 21);
  MatrixView view = view_of(pts, n, dim);
  Dendrogram d = agglomerate(view);

  // W_1 equals the total sum of squared deviations from the grand mean
  ClusterAssignment whole = cut(d, view, 1);
  double tss = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      double dev = pts[r * dim + c] - whole.centroids[0][c];
      tss += dev * dev;
    }
  CHECK(whole.within_dispersion == doctest::Approx(tss).epsilon(1e-6));

  // W_k also equals the prefix sum of merge costs, and decreases in k
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= 10; ++k) {
    ClusterAssignment a = cut(d, view, k);
    double prefix = 0.0;
    for (std::size_t i = 0; i + k < n + 0; ++i) prefix += d.merges[i].cost;
    CHECK(a.within_dispersion == doctest::Approx(prefix).epsilon(1e-6));
    CHECK(a.within_dispersion <= prev + 1e-9);
    prev = a.within_dispersion;

    for (std::size_t j = 0; j < a.centroids.size(); ++j) {
      std::vector<double> mean(dim, 0.0);
      std::size_t count = 0;
      for (std::size_t r = 0; r < n; ++r) {
        if (a.labels[r] != j) continue;
        ++count;
        for (std::size_t c = 0; c < dim; ++c) mean[c] += pts[r * dim + c];
      }
      REQUIRE(count > 0);
      for (std::size_t c = 0; c < dim; ++c)
        CHECK(a.centroids[j][c] == doctest::Approx(mean[c] / count).epsilon(1e-9));
    }
  }

  // oracle cut agrees
  Dendrogram naive = oracle::naive_ward(view);
  for (std::size_t k : {2ul, 5ul, 9ul}) {
    auto parts = oracle::partition_at(d, k);
    auto want = oracle::partition_at(naive, k);
    CHECK(parts == want);
  }
}

TEST_CASE("three tight blobs put the first gap maximum at k = 3") {
  auto pts = oracle::gaussian_blobs({{1, 1, 1, 1}, {3, 3, 3, 3}, {5, 5, 5, 5}}, 60, 0.1, 8);
  MatrixView view = view_of(pts, 180, 4);
  GapCurve curve = gap_curve(view, 8, 10, 99);
  ClusterCountSelection sel = select_num_clusters(curve, SelectionRule::first_local_max);
  CHECK(sel.n_clusters == 3);
  CHECK_FALSE(sel.fell_back_to_k_max);
  for (const auto& p : curve.points) CHECK(p.s >= 0.0);
}

TEST_CASE("reference equal to the data gives a flat zero gap") {
  auto pts = oracle::random_points(50, 3, 1.0, 5.0, 3);
  MatrixView view = view_of(pts, 50, 3);
  auto self_reference = [&pts](std::size_t) { return pts; };
  GapCurve curve = gap_curve_with_references(view, 6, 1, 0, self_reference);
  for (const auto& p : curve.points) {
    CHECK(std::abs(p.gap) < 1e-12);
    CHECK(p.s == 0.0);
  }
}

TEST_CASE("identical points cannot be gap-scanned") {
  std::vector<double> pts(30, 2.0);
  CHECK_THROWS_AS(gap_curve(view_of(pts, 10, 3), 3, 2, 1), compute_error);
}

TEST_CASE("gap statistic is deterministic in the seed") {
  auto pts = oracle::gaussian_blobs({{1, 1}, {4, 4}}, 40, 0.2, 12);
  MatrixView view = view_of(pts, 80, 2);
  GapCurve a = gap_curve(view, 6, 5, 42);
  GapCurve b = gap_curve(view, 6, 5, 42);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].gap == b.points[i].gap);
    CHECK(a.points[i].s == b.points[i].s);
  }
}

TEST_CASE("selection rules on hand-built curves") {
  ClusterCountSelection sel = select_num_clusters(curve_from_gaps({0.2, 0.6, 0.4}));
  CHECK(sel.n_clusters == 2);
  CHECK_FALSE(sel.fell_back_to_k_max);

  sel = select_num_clusters(curve_from_gaps({0.1, 0.2, 0.3, 0.4}));
  CHECK(sel.n_clusters == 4);
  CHECK(sel.fell_back_to_k_max);

  // gap(k) >= gap(k+1) - s(k+1) picks k = 1 when the curve is flat enough
  sel = select_num_clusters(curve_from_gaps({0.5, 0.52, 0.9}, 0.05), SelectionRule::tibshirani);
  CHECK(sel.n_clusters == 1);

  CHECK_THROWS_AS(select_num_clusters(curve_from_gaps({0.1})), input_error);
}

TEST_CASE("gap recomputes exactly as stored") {
  auto pts = oracle::gaussian_blobs({{1, 1}, {5, 5}}, 30, 0.3, 6);
  GapCurve curve = gap_curve(view_of(pts, 60, 2), 5, 4, 7);
  for (const auto& p : curve.points) CHECK(p.gap == p.ref_mean_log_w - p.log_w);
}
