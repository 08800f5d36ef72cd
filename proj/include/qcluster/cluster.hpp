#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qcluster/core.hpp"

namespace qcluster {

struct ClusterAssignment {
  std::vector<std::size_t> labels;             // per row, 0..n_clusters-1
  std::vector<std::vector<double>> centroids;  // indexed by cluster label
  double within_dispersion = 0.0;              // sum of squared distances to centroids
};

/// Merge cost under the minimum-variance criterion:
/// |A||B| / (|A|+|B|) * ||c_A - c_B||^2.
double ward_delta(std::size_t size_a, std::span<const double> centroid_a,
                  std::size_t size_b, std::span<const double> centroid_b);

/// Full minimum-variance agglomeration via the nearest-neighbor chain.
/// O(n^2 d) time, O(n) auxiliary memory. Equal costs break toward the
/// smaller minimum row id, so results are reproducible and match a naive
/// recompute-all-pairs implementation on tie-free inputs.
Dendrogram agglomerate(const MatrixView& points);

/// Partition induced by undoing the last n_clusters-1 merges. Cluster
/// indices are ordered by each cluster's smallest member row id.
ClusterAssignment cut(const Dendrogram& dendrogram, const MatrixView& points,
                      std::size_t n_clusters);

/// Produces the flat row-major coordinates of reference replicate b.
using ReferenceGenerator = std::function<std::vector<double>(std::size_t)>;

/// Gap statistic over k = 1..k_max: compares log within-cluster dispersion
/// of the data against n_refs replicates drawn uniformly over the data's
/// bounding box. Replicates run concurrently on independent substreams.
/// Pass the data's dendrogram if it is already built.
GapCurve gap_curve(const MatrixView& points, std::size_t k_max, std::size_t n_refs,
                   std::uint64_t seed, const Dendrogram* precomputed = nullptr);

/// Same, with a caller-supplied null model.
GapCurve gap_curve_with_references(const MatrixView& points, std::size_t k_max,
                                   std::size_t n_refs, std::uint64_t seed,
                                   const ReferenceGenerator& make_reference,
                                   const Dendrogram* precomputed = nullptr);

enum class SelectionRule { first_local_max, tibshirani };

std::string to_string(SelectionRule rule);
SelectionRule selection_rule_from_string(const std::string& name);

struct ClusterCountSelection {
  std::size_t n_clusters = 0;
  SelectionRule rule = SelectionRule::first_local_max;
  /// Set when no interior candidate exists and k_max was returned instead.
  bool fell_back_to_k_max = false;
};

/// first_local_max: smallest k >= 2 with gap(k-1) < gap(k) >= gap(k+1).
/// tibshirani: smallest k with gap(k) >= gap(k+1) - s(k+1).
ClusterCountSelection select_num_clusters(const GapCurve& curve,
                                          SelectionRule rule = SelectionRule::first_local_max);

}  // namespace qcluster
