#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcluster/core.hpp"

namespace qcluster {

struct ChiSquareTest {
  double statistic = 0.0;
  std::size_t df = 0;
  double p = 1.0;
  bool degenerate = false;  // all observations tied; statistic forced to 0
};

/// Sphericity check on the item correlation matrix:
/// chi2 = -(n - 1 - (2d+5)/6) * ln det R, df = d(d-1)/2.
ChiSquareTest bartlett_sphericity(const MatrixView& rows);

struct KmoResult {
  double overall = 0.0;
  std::vector<double> per_item;
};

/// Sampling adequacy from squared correlations vs squared anti-image partials.
KmoResult kmo(const MatrixView& rows);

struct PcaResult {
  std::vector<double> eigenvalues;             // descending, sum = item count
  std::vector<std::vector<double>> loadings;   // [item][component]
  std::size_t n_kaiser_components = 0;         // eigenvalues strictly above 1
};

/// Eigendecomposition of the item correlation matrix. Loadings are
/// eigenvectors scaled by sqrt(eigenvalue); each component's sign is fixed
/// so its largest-magnitude loading is positive.
PcaResult pca(const MatrixView& rows);

/// alpha = d/(d-1) * (1 - sum item variances / variance of row sums).
double cronbach_alpha(const MatrixView& rows);

/// Rank test across groups with the usual tie correction. All observations
/// identical is reported as degenerate (H = 0, p = 1).
ChiSquareTest kruskal_wallis(const std::vector<std::vector<double>>& samples);

struct DunnComparison {
  std::size_t group_a = 0;
  std::size_t group_b = 0;
  double z = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  bool degenerate = false;
};

/// Pairwise mean-rank z tests on the pooled ranking; p-values are two-sided
/// normal, adjusted by the number of pairs (capped at 1).
std::vector<DunnComparison> dunn_posthoc(const std::vector<std::vector<double>>& samples);

/// Rank correlation: Pearson correlation of mid-ranks. Empty when either
/// vector is constant (correlation undefined).
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct BaselineConfig {
  double bartlett_alpha = 0.05;
  double kmo_gate = 0.7;
  double low_loading = 0.4;  // flag items below this on the first component
};

struct GroupBaseline {
  std::string group;
  ChiSquareTest bartlett;
  KmoResult kmo;
  PcaResult pca;
  double cronbach_alpha = 0.0;
  bool applicable = false;
  std::string gate_failure;  // empty when applicable
  std::vector<std::size_t> low_loading_items;
};

struct BaselineReport {
  BaselineConfig config;
  std::vector<GroupBaseline> groups;
  bool cross_group_ran = false;
  std::string cross_group_skip_reason;
  ChiSquareTest kruskal_wallis;
  std::vector<DunnComparison> dunn;  // group indices follow `groups`
};

/// The classical workflow: per-group applicability gates and reliability,
/// then, when every group passes with a single retained component,
/// a rank test on per-row item means with pairwise follow-up.
BaselineReport classical_pipeline(const QuestionnaireMatrix& matrix,
                                  const BaselineConfig& config = {});

}  // namespace qcluster
