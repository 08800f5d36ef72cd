#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qcluster/cluster.hpp"
#include "qcluster/core.hpp"
#include "qcluster/fingerprint.hpp"
#include "qcluster/prep.hpp"

namespace qcluster {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

struct AnalysisConfig {
  std::uint64_t seed = 0;
  std::size_t k_impute = 5;
  double augment_sd = 0.1;
  std::size_t max_clusters = 20;
  std::size_t gap_refs = 10;
  std::optional<std::size_t> forced_clusters;  // bypasses gap-statistic selection
  SelectionRule rule = SelectionRule::first_local_max;
};

struct GroupSummary {
  Fingerprint fingerprint;
  double entropy = 0.0;
  std::vector<double> mean;  // in item space
};

/// Everything one end-to-end run produces, self-contained: re-rendering
/// views needs no other input, and every stochastic quantity carries the
/// seed it was produced from.
struct AnalysisReport {
  int schema_version = kReportSchemaVersion;
  std::string tool_version = kToolVersion;
  AnalysisConfig config;
  int scale_min = 1;
  int scale_max = 5;
  std::string linkage = "ward";
  std::string gap_reference;       // empty when selection was bypassed
  std::string similarity_metric = "euclidean";
  std::optional<GapCurve> gap;
  std::size_t n_clusters = 0;
  std::string selection_rule;      // rule name, or "manual"
  bool selection_warning = false;  // fell back to max_clusters
  ResponseTypeSet response_types;
  std::vector<GroupSummary> groups;
  std::vector<double> group_distances;  // row-major over groups
  Dendrogram group_dendrogram;
  std::string group_newick;
  std::vector<std::string> warnings;
};

/// Runs preparation, clustering, cluster-count selection (or the forced
/// override), response-type extraction, assignment of the original rows,
/// fingerprints, and group similarity. Deterministic given (matrix, config).
AnalysisReport analyze(const QuestionnaireMatrix& matrix, const AnalysisConfig& config);

}  // namespace qcluster
