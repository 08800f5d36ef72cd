#include "qcluster/analysis.hpp"

#include "qcluster/serial.hpp"

namespace qcluster {

AnalysisReport analyze(const QuestionnaireMatrix& matrix, const AnalysisConfig& config) {
  AnalysisReport report;
  report.config = config;
  report.scale_min = matrix.scale_min;
  report.scale_max = matrix.scale_max;

  for (const auto& v : validate(matrix)) {
    if (v.kind == "shape" || v.kind == "no-rows") throw input_error(v.message);
    report.warnings.push_back(v.kind + ": " + v.message);
  }

  PrepResult prep = prepare(matrix, PrepConfig{config.k_impute, config.augment_sd, config.seed});
  report.warnings.insert(report.warnings.end(), prep.warnings.begin(), prep.warnings.end());
  MatrixView points = view_of(prep.prepared);

  Dendrogram dendro = agglomerate(points);
  if (config.forced_clusters) {
    report.n_clusters = *config.forced_clusters;
    if (report.n_clusters < 1 || report.n_clusters > points.n_rows)
      throw input_error("forced cluster count " + std::to_string(report.n_clusters) +
                        " outside 1.." + std::to_string(points.n_rows));
    report.selection_rule = "manual";
  } else {
    std::size_t k_max = std::min(config.max_clusters, points.n_rows - 1);
    GapCurve curve = gap_curve(points, k_max, config.gap_refs, config.seed, &dendro);
    ClusterCountSelection sel = select_num_clusters(curve, config.rule);
    report.gap = std::move(curve);
    report.gap_reference = report.gap->reference;
    report.n_clusters = sel.n_clusters;
    report.selection_rule = to_string(sel.rule);
    report.selection_warning = sel.fell_back_to_k_max;
    if (sel.fell_back_to_k_max)
      report.warnings.push_back("gap curve has no interior local maximum; using k_max = " +
                                std::to_string(sel.n_clusters));
  }

  ClusterAssignment assignment = cut(dendro, points, report.n_clusters);
  report.response_types = extract_response_types(assignment);

  // Oversampled duplicates end here: evaluation uses original rows only.
  std::vector<std::size_t> type_labels = assign(prep.imputed, report.response_types);
  std::vector<Fingerprint> fps =
      fingerprints(type_labels, prep.imputed.group_labels, report.response_types.size());

  report.groups.reserve(fps.size());
  for (auto& fp : fps) {
    GroupSummary summary;
    summary.entropy = normalized_entropy(fp);
    summary.mean = group_mean(fp, report.response_types);
    summary.fingerprint = std::move(fp);
    report.groups.push_back(std::move(summary));
  }

  std::vector<Fingerprint> for_similarity;
  for_similarity.reserve(report.groups.size());
  for (const auto& g : report.groups) for_similarity.push_back(g.fingerprint);
  if (for_similarity.size() >= 2) {
    GroupSimilarityResult sim = group_similarity(for_similarity);
    report.group_distances = std::move(sim.distances);
    report.group_newick = render_newick(sim.dendrogram, sim.groups);
    report.group_dendrogram = std::move(sim.dendrogram);
  } else {
    report.warnings.push_back("only one group present; no similarity to measure");
  }
  return report;
}

}  // namespace qcluster
