#pragma once

#include <string>
#include <vector>

#include "qcluster/core.hpp"

namespace qcluster {

struct PrepConfig {
  std::size_t k_impute = 5;
  double augment_sd = 0.1;
  std::uint64_t seed = 0;
};

struct ImputeResult {
  QuestionnaireMatrix matrix;
  std::vector<std::string> warnings;
};

/// Fills each missing cell with the mean of that item over the k nearest
/// rows, distance taken over the query row's observed items. Candidate rows
/// must be complete on those items; ties at the k-th neighbor break toward
/// the lower row index. Observed cells are never modified.
ImputeResult knn_impute(const QuestionnaireMatrix& matrix, std::size_t k);

/// Tops every group up to the largest group size by sampling rows uniformly
/// with replacement from that group's own rows. Originals are all retained
/// and keep their order; duplicates are appended, flagged, group by group.
PreparedMatrix balance_groups(const QuestionnaireMatrix& matrix, std::uint64_t seed);

/// Adds i.i.d. gaussian noise (mean 0, given sd) to every cell. No rounding,
/// no clamping; each cell draws from its own (seed, row, column) substream.
PreparedMatrix augment(PreparedMatrix matrix, double sd, std::uint64_t seed);

struct PrepResult {
  QuestionnaireMatrix imputed;   // complete original-row matrix
  PreparedMatrix prepared;       // balanced + augmented clustering input
  std::vector<std::string> warnings;
};

/// Imputation, balancing, augmentation in sequence.
PrepResult prepare(const QuestionnaireMatrix& matrix, const PrepConfig& config);

}  // namespace qcluster
