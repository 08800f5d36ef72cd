#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcluster {

/// Malformed user input: files, flags, matrix shapes, bad parameters.
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation that cannot proceed: degenerate data, singular matrices.
class compute_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Survey responses: one row per questionnaire, one column per item.
/// Raw data holds integer scores on [scale_min, scale_max]; imputation may
/// later introduce fractional cells. A missing answer is std::nullopt.
struct QuestionnaireMatrix {
  std::size_t n_rows = 0;
  std::size_t n_items = 0;
  int scale_min = 1;
  int scale_max = 5;
  std::vector<std::optional<double>> values;  // row-major, n_rows * n_items
  std::vector<std::string> group_labels;      // one label per row

  std::optional<double>& at(std::size_t row, std::size_t col) {
    return values[row * n_items + col];
  }
  const std::optional<double>& at(std::size_t row, std::size_t col) const {
    return values[row * n_items + col];
  }

  bool complete() const;

  /// Distinct group labels in order of first appearance.
  std::vector<std::string> group_order() const;
  /// Per-row index into group_order().
  std::vector<std::size_t> group_indices() const;
};

/// Balanced and augmented matrix used as clustering input. Oversampled rows
/// are flagged so downstream evaluation can restrict itself to originals.
struct PreparedMatrix {
  std::size_t n_rows = 0;
  std::size_t n_items = 0;
  std::vector<double> values;  // row-major
  std::vector<std::string> group_labels;
  std::vector<std::uint8_t> oversampled;  // 0 = original, 1 = sampled duplicate

  double& at(std::size_t row, std::size_t col) { return values[row * n_items + col]; }
  double at(std::size_t row, std::size_t col) const { return values[row * n_items + col]; }
};

/// One agglomerative merge step. Node ids follow the usual convention:
/// leaves are 0..n-1, the i-th merge creates node n+i.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double cost = 0.0;    // increase in total within-cluster variance
  std::size_t size = 0; // rows in the merged cluster
};

/// Full merge tree; costs are non-decreasing along the sequence.
struct Dendrogram {
  std::size_t n_leaves = 0;
  std::vector<Merge> merges;  // n_leaves - 1 entries
};

/// Ordered cluster centers in item space.
struct ResponseTypeSet {
  std::size_t n_items = 0;
  std::vector<std::vector<double>> centroids;

  std::size_t size() const { return centroids.size(); }
};

/// Per-group distribution over response types; a point on the simplex.
struct Fingerprint {
  std::string group;
  std::vector<double> weights;
};

struct GapPoint {
  std::size_t k = 0;
  double log_w = 0.0;           // log within-cluster dispersion of the data
  double ref_mean_log_w = 0.0;  // mean log dispersion over reference replicates
  double gap = 0.0;             // ref_mean_log_w - log_w
  double s = 0.0;               // reference dispersion, adjusted for replicate count
};

struct GapCurve {
  std::vector<GapPoint> points;  // k = 1..k_max in order
  std::size_t n_refs = 0;
  std::uint64_t seed = 0;
  std::string reference = "uniform-box";  // null-model variant, recorded in reports
};

/// Additive integer-lattice noise: gaussian draw, round to nearest
/// (half away from zero), clamp into [clamp_low, clamp_high].
struct NoiseSpec {
  double sd = 0.0;
  int clamp_low = 1;
  int clamp_high = 5;
  bool round_to_nearest = true;
};

struct Violation {
  std::string kind;  // "shape" | "scale" | "out-of-scale" | "empty-label" | "no-rows"
  std::optional<std::size_t> row;
  std::optional<std::size_t> col;
  std::string message;
};

/// Reports every invariant violation; an empty result means the matrix is valid.
std::vector<Violation> validate(const QuestionnaireMatrix& matrix);

/// Non-owning view of a dense row-major real matrix.
struct MatrixView {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  const double* data = nullptr;

  const double* row(std::size_t r) const { return data + r * n_cols; }
  double at(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }
};

inline MatrixView view_of(const PreparedMatrix& m) {
  return MatrixView{m.n_rows, m.n_items, m.values.data()};
}

inline MatrixView view_of(const std::vector<double>& flat, std::size_t n_rows,
                          std::size_t n_cols) {
  return MatrixView{n_rows, n_cols, flat.data()};
}

}  // namespace qcluster
