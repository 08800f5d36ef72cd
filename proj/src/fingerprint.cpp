#include "qcluster/fingerprint.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

namespace qcluster {

ResponseTypeSet extract_response_types(const ClusterAssignment& assignment) {
  ResponseTypeSet types;
  types.centroids = assignment.centroids;
  types.n_items = assignment.centroids.empty() ? 0 : assignment.centroids.front().size();
  return types;
}

std::vector<std::size_t> assign(const QuestionnaireMatrix& matrix, const ResponseTypeSet& types) {
  if (types.size() == 0) throw input_error("assignment needs at least one response type");
  if (matrix.n_items != types.n_items)
    throw input_error("matrix has " + std::to_string(matrix.n_items) + " items, response types have " +
                      std::to_string(types.n_items));
  std::vector<std::size_t> labels(matrix.n_rows);
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < types.size(); ++j) {
      double dist2 = 0.0;
      for (std::size_t c = 0; c < matrix.n_items; ++c) {
        const auto& v = matrix.at(r, c);
        if (!v)
          throw input_error("row " + std::to_string(r) + " has a missing item; impute first");
        double diff = *v - types.centroids[j][c];
        dist2 += diff * diff;
      }
      if (dist2 < best) {  // strict: ties stay with the lower index
        best = dist2;
        best_j = j;
      }
    }
    labels[r] = best_j;
  }
  return labels;
}

std::vector<Fingerprint> fingerprints(const std::vector<std::size_t>& type_labels,
                                      const std::vector<std::string>& group_labels,
                                      std::size_t n_types) {
  if (type_labels.size() != group_labels.size())
    throw input_error("type labels and group labels must align row by row");
  if (n_types == 0) throw input_error("need at least one response type");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& g : group_labels) {
    if (index.emplace(g, order.size()).second) order.push_back(g);
  }
  if (order.empty()) throw input_error("no rows, no groups");

  std::vector<std::vector<std::size_t>> counts(order.size(), std::vector<std::size_t>(n_types, 0));
  std::vector<std::size_t> totals(order.size(), 0);
  for (std::size_t r = 0; r < type_labels.size(); ++r) {
    if (type_labels[r] >= n_types)
      throw input_error("row " + std::to_string(r) + " carries type index " +
                        std::to_string(type_labels[r]) + " >= " + std::to_string(n_types));
    std::size_t g = index[group_labels[r]];
    ++counts[g][type_labels[r]];
    ++totals[g];
  }
  std::vector<Fingerprint> out;
  out.reserve(order.size());
  for (std::size_t g = 0; g < order.size(); ++g) {
    Fingerprint fp;
    fp.group = order[g];
    fp.weights.resize(n_types);
    for (std::size_t j = 0; j < n_types; ++j)
      fp.weights[j] = static_cast<double>(counts[g][j]) / static_cast<double>(totals[g]);
    out.push_back(std::move(fp));
  }
  return out;
}

double normalized_entropy(const Fingerprint& fingerprint) {
  const std::size_t l = fingerprint.weights.size();
  if (l <= 1) return 0.0;
  double h = 0.0;
  for (double f : fingerprint.weights) {
    if (f > 0.0) h -= f * std::log(f);
  }
  return h / std::log(static_cast<double>(l));
}

std::vector<double> group_mean(const Fingerprint& fingerprint, const ResponseTypeSet& types) {
  if (fingerprint.weights.size() != types.size())
    throw input_error("fingerprint has " + std::to_string(fingerprint.weights.size()) +
                      " weights, response type set has " + std::to_string(types.size()));
  std::vector<double> mean(types.n_items, 0.0);
  for (std::size_t j = 0; j < types.size(); ++j) {
    for (std::size_t c = 0; c < types.n_items; ++c)
      mean[c] += fingerprint.weights[j] * types.centroids[j][c];
  }
  return mean;
}

GroupSimilarityResult group_similarity(const std::vector<Fingerprint>& fps) {
  const std::size_t g = fps.size();
  if (g < 2) throw input_error("group similarity needs at least two groups");
  const std::size_t l = fps.front().weights.size();
  for (const auto& fp : fps) {
    if (fp.weights.size() != l)
      throw input_error("fingerprints must share one response type set");
  }
  GroupSimilarityResult out;
  out.groups.reserve(g);
  std::vector<double> flat(g * l);
  for (std::size_t i = 0; i < g; ++i) {
    out.groups.push_back(fps[i].group);
    for (std::size_t j = 0; j < l; ++j) flat[i * l + j] = fps[i].weights[j];
  }
  out.distances.assign(g * g, 0.0);
  for (std::size_t a = 0; a < g; ++a) {
    for (std::size_t b = a + 1; b < g; ++b) {
      double dist2 = 0.0;
      for (std::size_t j = 0; j < l; ++j) {
        double diff = flat[a * l + j] - flat[b * l + j];
        dist2 += diff * diff;
      }
      double dist = std::sqrt(dist2);
      out.distances[a * g + b] = dist;
      out.distances[b * g + a] = dist;
    }
  }
  out.dendrogram = agglomerate(view_of(flat, g, l));
  return out;
}

}  // namespace qcluster
