#pragma once

#include <string>
#include <vector>

#include "qcluster/cluster.hpp"
#include "qcluster/core.hpp"

namespace qcluster {

/// Cluster centers in cluster-index order; the order is fixed from here on.
ResponseTypeSet extract_response_types(const ClusterAssignment& assignment);

/// Maps every row of a complete matrix to its nearest response type
/// (Euclidean distance, ties toward the lower type index).
std::vector<std::size_t> assign(const QuestionnaireMatrix& matrix, const ResponseTypeSet& types);

/// Per-group proportions over response types, in group first-appearance order.
std::vector<Fingerprint> fingerprints(const std::vector<std::size_t>& type_labels,
                                      const std::vector<std::string>& group_labels,
                                      std::size_t n_types);

/// -1/log(l) * sum f_i log f_i, with 0 log 0 = 0. One-hot gives 0, uniform
/// gives 1; a single response type returns 0 by convention.
double normalized_entropy(const Fingerprint& fingerprint);

/// Convex combination sum_j f_j r_j, the natural group mean.
std::vector<double> group_mean(const Fingerprint& fingerprint, const ResponseTypeSet& types);

struct GroupSimilarityResult {
  std::vector<std::string> groups;
  std::vector<double> distances;  // row-major g x g, symmetric, zero diagonal
  Dendrogram dendrogram;          // leaves indexed like `groups`

  double distance(std::size_t a, std::size_t b) const { return distances[a * groups.size() + b]; }
};

/// Pairwise Euclidean distances between fingerprints plus a minimum-variance
/// dendrogram over the groups.
GroupSimilarityResult group_similarity(const std::vector<Fingerprint>& fps);

}  // namespace qcluster
