#include "qcluster/prep.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qcluster/rng.hpp"

namespace qcluster {

namespace {
constexpr std::uint64_t kTagBalance = 0xBA1A;
constexpr std::uint64_t kTagAugment = 0xA46E;
}  // namespace

ImputeResult knn_impute(const QuestionnaireMatrix& matrix, std::size_t k) {
  if (k < 1) throw input_error("imputation needs k >= 1");
  ImputeResult result{matrix, {}};
  QuestionnaireMatrix& out = result.matrix;

  const std::size_t n = matrix.n_rows, d = matrix.n_items;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::size_t> observed, missing;
    for (std::size_t c = 0; c < d; ++c) {
      (matrix.at(r, c) ? observed : missing).push_back(c);
    }
    if (missing.empty()) continue;
    if (observed.empty())
      throw input_error("row " + std::to_string(r) + " has no observed items; cannot impute");

    // Candidates: every other row that is complete on this row's observed items.
    std::vector<std::pair<double, std::size_t>> candidates;  // (squared distance, row)
    for (std::size_t r2 = 0; r2 < n; ++r2) {
      if (r2 == r) continue;
      double dist2 = 0.0;
      bool eligible = true;
      for (std::size_t c : observed) {
        const auto& v = matrix.at(r2, c);
        if (!v) {
          eligible = false;
          break;
        }
        double diff = *v - *matrix.at(r, c);
        dist2 += diff * diff;
      }
      if (eligible) candidates.emplace_back(dist2, r2);
    }
    if (candidates.empty())
      throw input_error("row " + std::to_string(r) +
                        ": no candidate rows are complete on its observed items");
    std::sort(candidates.begin(), candidates.end());
    std::size_t k_eff = std::min(k, candidates.size());
    if (k_eff < k) {
      result.warnings.push_back("row " + std::to_string(r) + ": only " + std::to_string(k_eff) +
                                " of " + std::to_string(k) + " requested neighbors available");
    }
    for (std::size_t c : missing) {
      double sum = 0.0;
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < k_eff; ++i) {
        const auto& v = matrix.at(candidates[i].second, c);
        if (v) {
          sum += *v;
          ++cnt;
        }
      }
      if (cnt == 0)
        throw input_error("row " + std::to_string(r) + ", item " + std::to_string(c) +
                          ": none of the selected neighbors observed this item");
      out.at(r, c) = sum / static_cast<double>(cnt);
    }
  }
  return result;
}

PreparedMatrix balance_groups(const QuestionnaireMatrix& matrix, std::uint64_t seed) {
  if (!matrix.complete()) throw input_error("balancing requires a complete (imputed) matrix");
  if (matrix.n_rows == 0) throw input_error("cannot balance an empty matrix");

  const std::size_t d = matrix.n_items;
  const auto order = matrix.group_order();
  const auto gidx = matrix.group_indices();
  std::vector<std::vector<std::size_t>> rows_per_group(order.size());
  for (std::size_t r = 0; r < matrix.n_rows; ++r) rows_per_group[gidx[r]].push_back(r);

  std::size_t max_size = 0;
  for (const auto& rows : rows_per_group) max_size = std::max(max_size, rows.size());

  PreparedMatrix out;
  out.n_items = d;
  out.n_rows = order.size() * max_size;
  out.values.reserve(out.n_rows * d);
  out.group_labels.reserve(out.n_rows);
  out.oversampled.reserve(out.n_rows);

  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    for (std::size_t c = 0; c < d; ++c) out.values.push_back(*matrix.at(r, c));
    out.group_labels.push_back(matrix.group_labels[r]);
    out.oversampled.push_back(0);
  }
  for (std::size_t gi = 0; gi < order.size(); ++gi) {
    const auto& rows = rows_per_group[gi];
    for (std::size_t j = rows.size(); j < max_size; ++j) {
      RngStream rng(derive_seed(seed, kTagBalance, gi, j));
      std::size_t src = rows[rng.next_below(rows.size())];
      for (std::size_t c = 0; c < d; ++c) out.values.push_back(*matrix.at(src, c));
      out.group_labels.push_back(order[gi]);
      out.oversampled.push_back(1);
    }
  }
  return out;
}

PreparedMatrix augment(PreparedMatrix matrix, double sd, std::uint64_t seed) {
  if (sd < 0.0) throw input_error("augmentation sd must be nonnegative");
  if (sd == 0.0) return matrix;
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    for (std::size_t c = 0; c < matrix.n_items; ++c) {
      RngStream rng(derive_seed(seed, kTagAugment, r, c));
      matrix.at(r, c) += sd * rng.next_gaussian();
    }
  }
  return matrix;
}

PrepResult prepare(const QuestionnaireMatrix& matrix, const PrepConfig& config) {
  ImputeResult imputed = knn_impute(matrix, config.k_impute);
  PreparedMatrix balanced = balance_groups(imputed.matrix, config.seed);
  PreparedMatrix prepared = augment(std::move(balanced), config.augment_sd, config.seed);
  return PrepResult{std::move(imputed.matrix), std::move(prepared), std::move(imputed.warnings)};
}

}  // namespace qcluster
