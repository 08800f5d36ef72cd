#include "qcluster/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

namespace qcluster {

namespace {

double chi_squared_upper_tail(double statistic, std::size_t df) {
  if (statistic <= 0.0) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(df));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

Eigen::MatrixXd correlation_matrix(const MatrixView& rows) {
  const std::size_t n = rows.n_rows, d = rows.n_cols;
  if (n < 2) throw input_error("correlation needs at least two rows");
  Eigen::MatrixXd x(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) x(r, c) = rows.at(r, c);
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  Eigen::RowVectorXd sd = (x.cwiseProduct(x).colwise().sum() / double(n - 1)).cwiseSqrt();
  for (std::size_t c = 0; c < d; ++c) {
    if (sd(c) <= 0.0)
      throw compute_error("item " + std::to_string(c) +
                          " has zero variance; correlation matrix is singular");
  }
  Eigen::MatrixXd r = (x.transpose() * x) / double(n - 1);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) r(i, j) /= sd(i) * sd(j);
  return r;
}

// Eigenvalues ascending from Eigen; callers want them descending.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigensolve(const Eigen::MatrixXd& r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(r);
  if (solver.info() != Eigen::Success)
    throw compute_error("eigendecomposition of the correlation matrix did not converge");
  return solver;
}

// Mid-ranks of the pooled sample plus the tie term sum(t^3 - t).
struct PooledRanks {
  std::vector<double> ranks;  // aligned with the pooled values
  double tie_term = 0.0;
};

PooledRanks midranks(const std::vector<double>& pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  PooledRanks out;
  out.ranks.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // average of positions i..j, 1-based
    for (std::size_t t = i; t <= j; ++t) out.ranks[order[t]] = rank;
    double ties = static_cast<double>(j - i + 1);
    out.tie_term += ties * ties * ties - ties;
    i = j + 1;
  }
  return out;
}

struct RankSummary {
  PooledRanks pooled;
  std::vector<double> mean_rank;  // per group
  std::vector<std::size_t> sizes;
  std::size_t total = 0;
};

RankSummary rank_groups(const std::vector<std::vector<double>>& samples) {
  if (samples.size() < 2) throw input_error("rank tests need at least two groups");
  std::vector<double> pooled;
  for (const auto& g : samples) {
    if (g.empty()) throw input_error("rank tests need at least one observation per group");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  RankSummary out;
  out.total = pooled.size();
  out.pooled = midranks(pooled);
  out.sizes.reserve(samples.size());
  out.mean_rank.reserve(samples.size());
  std::size_t offset = 0;
  for (const auto& g : samples) {
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) sum += out.pooled.ranks[offset + i];
    out.mean_rank.push_back(sum / static_cast<double>(g.size()));
    out.sizes.push_back(g.size());
    offset += g.size();
  }
  return out;
}

}  // namespace

ChiSquareTest bartlett_sphericity(const MatrixView& rows) {
  const std::size_t n = rows.n_rows, d = rows.n_cols;
  if (n <= d) throw input_error("sphericity test needs more rows than items");
  Eigen::MatrixXd r = correlation_matrix(rows);
  auto solver = eigensolve(r);
  const auto& ev = solver.eigenvalues();
  if (ev(0) <= 1e-12) {
    char cond[48];
    std::snprintf(cond, sizeof cond, "%.3g", ev(d - 1) / std::max(ev(0), 1e-300));
    throw compute_error("correlation matrix is singular (condition number ~" +
                        std::string(cond) + ")");
  }
  double log_det = 0.0;
  for (std::size_t i = 0; i < d; ++i) log_det += std::log(ev(i));
  ChiSquareTest test;
  test.statistic = -(static_cast<double>(n) - 1.0 - (2.0 * d + 5.0) / 6.0) * log_det;
  test.df = d * (d - 1) / 2;
  test.p = chi_squared_upper_tail(test.statistic, test.df);
  return test;
}

KmoResult kmo(const MatrixView& rows) {
  Eigen::MatrixXd r = correlation_matrix(rows);
  const std::size_t d = rows.n_cols;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(r);
  if (!lu.isInvertible()) throw compute_error("correlation matrix is not invertible");
  Eigen::MatrixXd s = lu.inverse();
  Eigen::MatrixXd partial(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) partial(i, j) = -s(i, j) / std::sqrt(s(i, i) * s(j, j));

  KmoResult out;
  out.per_item.resize(d);
  double sum_r2 = 0.0, sum_p2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double row_r2 = 0.0, row_p2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) continue;
      row_r2 += r(i, j) * r(i, j);
      row_p2 += partial(i, j) * partial(i, j);
    }
    out.per_item[i] = row_r2 / (row_r2 + row_p2);
    sum_r2 += row_r2;
    sum_p2 += row_p2;
  }
  out.overall = sum_r2 / (sum_r2 + sum_p2);
  return out;
}

PcaResult pca(const MatrixView& rows) {
  Eigen::MatrixXd r = correlation_matrix(rows);
  const std::size_t d = rows.n_cols;
  auto solver = eigensolve(r);
  PcaResult out;
  out.eigenvalues.resize(d);
  out.loadings.assign(d, std::vector<double>(d, 0.0));
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t src = d - 1 - c;  // descending
    double ev = std::max(solver.eigenvalues()(src), 0.0);
    out.eigenvalues[c] = ev;
    if (ev > 1.0) ++out.n_kaiser_components;
    Eigen::VectorXd vec = solver.eigenvectors().col(src) * std::sqrt(ev);
    std::size_t peak = 0;
    for (std::size_t i = 1; i < d; ++i) {
      if (std::abs(vec(i)) > std::abs(vec(peak))) peak = i;
    }
    if (vec(peak) < 0.0) vec = -vec;
    for (std::size_t i = 0; i < d; ++i) out.loadings[i][c] = vec(i);
  }
  return out;
}

double cronbach_alpha(const MatrixView& rows) {
  const std::size_t n = rows.n_rows, d = rows.n_cols;
  if (d < 2) throw input_error("alpha needs at least two items");
  if (n < 2) throw input_error("alpha needs at least two rows");
  std::vector<double> col_mean(d, 0.0);
  double total_mean = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      col_mean[c] += rows.at(r, c);
      row_sum += rows.at(r, c);
    }
    total_mean += row_sum;
  }
  for (double& m : col_mean) m /= static_cast<double>(n);
  total_mean /= static_cast<double>(n);

  double item_var_sum = 0.0, total_var = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double v = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double dev = rows.at(r, c) - col_mean[c];
      v += dev * dev;
    }
    item_var_sum += v / static_cast<double>(n - 1);
  }
  for (std::size_t r = 0; r < n; ++r) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < d; ++c) row_sum += rows.at(r, c);
    double dev = row_sum - total_mean;
    total_var += dev * dev;
  }
  total_var /= static_cast<double>(n - 1);
  if (total_var <= 0.0) throw compute_error("total score variance is zero; alpha undefined");
  return (static_cast<double>(d) / (d - 1.0)) * (1.0 - item_var_sum / total_var);
}

ChiSquareTest kruskal_wallis(const std::vector<std::vector<double>>& samples) {
  RankSummary rk = rank_groups(samples);
  const double n = static_cast<double>(rk.total);
  ChiSquareTest test;
  test.df = samples.size() - 1;
  double correction = 1.0 - rk.pooled.tie_term / (n * n * n - n);
  if (correction <= 0.0) {  // every observation identical
    test.degenerate = true;
    return test;
  }
  double h = 0.0;
  for (std::size_t g = 0; g < samples.size(); ++g) {
    double rsum = rk.mean_rank[g] * static_cast<double>(rk.sizes[g]);
    h += rsum * rsum / static_cast<double>(rk.sizes[g]);
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
  test.statistic = h / correction;
  test.p = chi_squared_upper_tail(test.statistic, test.df);
  return test;
}

std::vector<DunnComparison> dunn_posthoc(const std::vector<std::vector<double>>& samples) {
  RankSummary rk = rank_groups(samples);
  const double n = static_cast<double>(rk.total);
  const std::size_t g = samples.size();
  const double pairs = static_cast<double>(g * (g - 1) / 2);
  // Tie-corrected variance of a mean-rank difference, up to the size factor.
  double base_var = n * (n + 1.0) / 12.0 - rk.pooled.tie_term / (12.0 * (n - 1.0));

  std::vector<DunnComparison> out;
  out.reserve(g * (g - 1) / 2);
  for (std::size_t a = 0; a < g; ++a) {
    for (std::size_t b = a + 1; b < g; ++b) {
      DunnComparison cmp;
      cmp.group_a = a;
      cmp.group_b = b;
      double var = base_var * (1.0 / static_cast<double>(rk.sizes[a]) +
                               1.0 / static_cast<double>(rk.sizes[b]));
      if (var <= 0.0) {
        cmp.degenerate = true;
      } else {
        cmp.z = (rk.mean_rank[a] - rk.mean_rank[b]) / std::sqrt(var);
        cmp.p_raw = normal_two_sided(cmp.z);
        cmp.p_adjusted = std::min(1.0, cmp.p_raw * pairs);
      }
      out.push_back(cmp);
    }
  }
  return out;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw input_error("rank correlation needs equal-length vectors");
  if (x.size() < 3) throw input_error("rank correlation needs at least three observations");
  auto rx = midranks(std::vector<double>(x.begin(), x.end())).ranks;
  auto ry = midranks(std::vector<double>(y.begin(), y.end())).ranks;
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    double dx = rx[i] - mx, dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

BaselineReport classical_pipeline(const QuestionnaireMatrix& matrix, const BaselineConfig& config) {
  if (!matrix.complete())
    throw input_error("classical pipeline requires a complete matrix; impute missing values first");
  const auto order = matrix.group_order();
  const auto gidx = matrix.group_indices();
  const std::size_t d = matrix.n_items;

  std::vector<std::vector<double>> group_values(order.size());
  for (std::size_t r = 0; r < matrix.n_rows; ++r) {
    auto& dst = group_values[gidx[r]];
    for (std::size_t c = 0; c < d; ++c) dst.push_back(*matrix.at(r, c));
  }

  BaselineReport report;
  report.config = config;
  bool all_applicable = true;
  bool all_unidimensional = true;
  for (std::size_t g = 0; g < order.size(); ++g) {
    MatrixView rows = view_of(group_values[g], group_values[g].size() / d, d);
    GroupBaseline gb;
    gb.group = order[g];
    gb.bartlett = bartlett_sphericity(rows);
    gb.kmo = kmo(rows);
    gb.pca = pca(rows);
    gb.cronbach_alpha = cronbach_alpha(rows);
    if (gb.bartlett.p >= config.bartlett_alpha) {
      gb.gate_failure = "bartlett";
    } else if (gb.kmo.overall < config.kmo_gate) {
      gb.gate_failure = "kmo";
    }
    gb.applicable = gb.gate_failure.empty();
    for (std::size_t i = 0; i < d; ++i) {
      if (std::abs(gb.pca.loadings[i][0]) < config.low_loading) gb.low_loading_items.push_back(i);
    }
    all_applicable = all_applicable && gb.applicable;
    all_unidimensional = all_unidimensional && gb.pca.n_kaiser_components == 1;
    report.groups.push_back(std::move(gb));
  }

  if (!all_applicable) {
    report.cross_group_skip_reason = "at least one group fails the applicability gates";
  } else if (!all_unidimensional) {
    report.cross_group_skip_reason =
        "component structure differs from one retained component; a single mean score is not comparable";
  } else {
    std::vector<std::vector<double>> scores(order.size());
    for (std::size_t r = 0; r < matrix.n_rows; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < d; ++c) sum += *matrix.at(r, c);
      scores[gidx[r]].push_back(sum / static_cast<double>(d));
    }
    report.kruskal_wallis = kruskal_wallis(scores);
    report.dunn = dunn_posthoc(scores);
    report.cross_group_ran = true;
  }
  return report;
}

}  // namespace qcluster
