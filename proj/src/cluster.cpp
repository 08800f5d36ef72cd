#include "qcluster/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "qcluster/rng.hpp"

namespace qcluster {

namespace {

constexpr std::uint64_t kTagReference = 0x4EF5;

double squared_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

struct DisjointSet {
  std::vector<std::size_t> parent;

  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;
    return a;
  }
};

// Merge recorded during chain traversal; slots are minimum row ids, which
// the relabeling pass resolves to dendrogram node ids.
struct RawMerge {
  std::size_t a = 0;
  std::size_t b = 0;
  double cost = 0.0;
  std::size_t size = 0;
};

}  // namespace

double ward_delta(std::size_t size_a, std::span<const double> centroid_a,
                  std::size_t size_b, std::span<const double> centroid_b) {
  if (centroid_a.size() != centroid_b.size())
    throw input_error("centroid dimensions differ: " + std::to_string(centroid_a.size()) +
                      " vs " + std::to_string(centroid_b.size()));
  if (size_a == 0 || size_b == 0) throw input_error("cluster sizes must be at least 1");
  double factor = static_cast<double>(size_a) * static_cast<double>(size_b) /
                  static_cast<double>(size_a + size_b);
  return factor * squared_distance(centroid_a.data(), centroid_b.data(), centroid_a.size());
}

Dendrogram agglomerate(const MatrixView& points) {
  const std::size_t n = points.n_rows, d = points.n_cols;
  if (n < 2) throw input_error("agglomeration needs at least two points");

  // Cluster slots are identified by their minimum row id: merging always
  // writes into the smaller slot, so the slot id stays the minimum.
  std::vector<double> centroids(points.data, points.data + n * d);
  std::vector<std::size_t> sizes(n, 1);
  std::vector<std::uint32_t> alive(n);
  std::iota(alive.begin(), alive.end(), 0u);
  std::vector<std::uint32_t> pos(n);
  std::iota(pos.begin(), pos.end(), 0u);

  auto remove_slot = [&](std::uint32_t slot) {
    std::uint32_t p = pos[slot];
    alive[p] = alive.back();
    pos[alive[p]] = p;
    alive.pop_back();
  };

  std::vector<RawMerge> raw;
  raw.reserve(n - 1);
  std::vector<std::uint32_t> chain;
  chain.reserve(n);

  while (raw.size() < n - 1) {
    if (chain.empty()) {
      chain.push_back(*std::min_element(alive.begin(), alive.end()));
    }
    const std::uint32_t x = chain.back();
    const std::uint32_t prev =
        chain.size() >= 2 ? chain[chain.size() - 2] : std::numeric_limits<std::uint32_t>::max();
    const double* cx = centroids.data() + static_cast<std::size_t>(x) * d;
    const double wx = static_cast<double>(sizes[x]);

    std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
    double best_delta = std::numeric_limits<double>::infinity();
    for (std::uint32_t y : alive) {
      if (y == x) continue;
      double wy = static_cast<double>(sizes[y]);
      double delta = (wx * wy / (wx + wy)) *
                     squared_distance(cx, centroids.data() + static_cast<std::size_t>(y) * d, d);
      if (delta < best_delta) {
        best_delta = delta;
        best = y;
      } else if (delta == best_delta) {
        // Ties prefer the chain predecessor (guarantees a reciprocal pair
        // is detected), then the smaller slot id.
        if (y == prev || (best != prev && y < best)) best = y;
      }
    }

    if (best == prev) {
      std::uint32_t lo = std::min(x, prev), hi = std::max(x, prev);
      raw.push_back({lo, hi, best_delta, sizes[lo] + sizes[hi]});
      double wl = static_cast<double>(sizes[lo]), wh = static_cast<double>(sizes[hi]);
      double* cl = centroids.data() + static_cast<std::size_t>(lo) * d;
      const double* ch = centroids.data() + static_cast<std::size_t>(hi) * d;
      for (std::size_t j = 0; j < d; ++j) cl[j] = (wl * cl[j] + wh * ch[j]) / (wl + wh);
      sizes[lo] += sizes[hi];
      remove_slot(hi);
      chain.pop_back();
      chain.pop_back();
    } else {
      chain.push_back(best);
    }
  }

  // The chain discovers merges out of cost order; sorting restores the
  // greedy sequence (stable, so exact ties keep discovery order).
  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawMerge& a, const RawMerge& b) { return a.cost < b.cost; });

  Dendrogram out;
  out.n_leaves = n;
  out.merges.reserve(n - 1);
  DisjointSet uf(n);
  std::vector<std::size_t> node_of(n);
  std::iota(node_of.begin(), node_of.end(), std::size_t{0});
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::size_t ra = uf.find(raw[i].a), rb = uf.find(raw[i].b);
    std::size_t left = node_of[ra], right = node_of[rb];
    if (left > right) std::swap(left, right);
    out.merges.push_back({left, right, raw[i].cost, raw[i].size});
    node_of[uf.unite(ra, rb)] = n + i;
  }
  return out;
}

ClusterAssignment cut(const Dendrogram& dendrogram, const MatrixView& points,
                      std::size_t n_clusters) {
  const std::size_t n = dendrogram.n_leaves, d = points.n_cols;
  if (points.n_rows != n)
    throw input_error("dendrogram has " + std::to_string(n) + " leaves, points have " +
                      std::to_string(points.n_rows) + " rows");
  if (n_clusters < 1 || n_clusters > n)
    throw input_error("cluster count " + std::to_string(n_clusters) + " outside 1.." +
                      std::to_string(n));

  DisjointSet uf(n);
  std::vector<std::size_t> rep_row(2 * n - 1);  // any member row of each node
  std::iota(rep_row.begin(), rep_row.begin() + n, std::size_t{0});
  const std::size_t applied = n - n_clusters;
  for (std::size_t i = 0; i < applied; ++i) {
    const Merge& m = dendrogram.merges[i];
    std::size_t ra = rep_row[m.left], rb = rep_row[m.right];
    rep_row[n + i] = ra;
    uf.unite(ra, rb);
  }

  // Order clusters by smallest member row id.
  std::vector<std::size_t> cluster_of_root(n, std::numeric_limits<std::size_t>::max());
  ClusterAssignment out;
  out.labels.resize(n);
  std::size_t next = 0;
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t root = uf.find(r);
    if (cluster_of_root[root] == std::numeric_limits<std::size_t>::max())
      cluster_of_root[root] = next++;
    out.labels[r] = cluster_of_root[root];
  }

  out.centroids.assign(n_clusters, std::vector<double>(d, 0.0));
  std::vector<std::size_t> counts(n_clusters, 0);
  for (std::size_t r = 0; r < n; ++r) {
    auto& c = out.centroids[out.labels[r]];
    const double* row = points.row(r);
    for (std::size_t j = 0; j < d; ++j) c[j] += row[j];
    ++counts[out.labels[r]];
  }
  for (std::size_t k = 0; k < n_clusters; ++k) {
    for (double& v : out.centroids[k]) v /= static_cast<double>(counts[k]);
  }
  double w = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    w += squared_distance(points.row(r), out.centroids[out.labels[r]].data(), d);
  }
  out.within_dispersion = w;
  return out;
}

namespace {

// log W_k for k = 1..k_max. Each merge cost is exactly the dispersion it
// adds, so W_k is the prefix sum of the first n-k costs.
std::vector<double> log_dispersion_per_k(const Dendrogram& dendro, std::size_t k_max) {
  const std::size_t n = dendro.n_leaves;
  std::vector<double> prefix(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) prefix[i + 1] = prefix[i] + dendro.merges[i].cost;
  std::vector<double> out(k_max);
  for (std::size_t k = 1; k <= k_max; ++k) {
    double w = prefix[n - k];
    if (!(w > 0.0))
      throw compute_error("degenerate data: within-cluster dispersion is zero at k = " +
                          std::to_string(k) + " (duplicate or constant points)");
    out[k - 1] = std::log(w);
  }
  return out;
}

}  // namespace

GapCurve gap_curve_with_references(const MatrixView& points, std::size_t k_max,
                                   std::size_t n_refs, std::uint64_t seed,
                                   const ReferenceGenerator& make_reference,
                                   const Dendrogram* precomputed) {
  const std::size_t n = points.n_rows;
  if (k_max < 1) throw input_error("k_max must be at least 1");
  if (k_max >= n) throw input_error("k_max must be below the number of points");
  if (n_refs < 1) throw input_error("gap statistic needs at least one reference replicate");

  Dendrogram local;
  if (!precomputed) {
    local = agglomerate(points);
    precomputed = &local;
  }
  std::vector<double> data_log_w = log_dispersion_per_k(*precomputed, k_max);

  auto replicate = [&](std::size_t b) {
    std::vector<double> ref = make_reference(b);
    Dendrogram dendro = agglomerate(view_of(ref, n, points.n_cols));
    return log_dispersion_per_k(dendro, k_max);
  };
  std::vector<std::future<std::vector<double>>> futures;
  futures.reserve(n_refs);
  for (std::size_t b = 0; b < n_refs; ++b)
    futures.push_back(std::async(std::launch::async, replicate, b));
  std::vector<std::vector<double>> ref_log_w;
  ref_log_w.reserve(n_refs);
  for (auto& f : futures) ref_log_w.push_back(f.get());

  GapCurve curve;
  curve.n_refs = n_refs;
  curve.seed = seed;
  curve.points.resize(k_max);
  const double inv_b = 1.0 / static_cast<double>(n_refs);
  for (std::size_t k = 1; k <= k_max; ++k) {
    double mean = 0.0;
    for (const auto& rep : ref_log_w) mean += rep[k - 1];
    mean *= inv_b;
    double var = 0.0;
    for (const auto& rep : ref_log_w) {
      double dev = rep[k - 1] - mean;
      var += dev * dev;
    }
    var *= inv_b;
    GapPoint& p = curve.points[k - 1];
    p.k = k;
    p.log_w = data_log_w[k - 1];
    p.ref_mean_log_w = mean;
    p.gap = mean - p.log_w;
    p.s = std::sqrt(var) * std::sqrt(1.0 + inv_b);
  }
  return curve;
}

GapCurve gap_curve(const MatrixView& points, std::size_t k_max, std::size_t n_refs,
                   std::uint64_t seed, const Dendrogram* precomputed) {
  const std::size_t n = points.n_rows, d = points.n_cols;
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = points.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], row[j]);
      hi[j] = std::max(hi[j], row[j]);
    }
  }
  auto uniform_box = [&, lo, hi](std::size_t b) {
    std::vector<double> ref(n * d);
    for (std::size_t r = 0; r < n; ++r) {
      RngStream rng(derive_seed(seed, kTagReference, b, r));
      for (std::size_t j = 0; j < d; ++j)
        ref[r * d + j] = lo[j] + (hi[j] - lo[j]) * rng.next_unit();
    }
    return ref;
  };
  return gap_curve_with_references(points, k_max, n_refs, seed, uniform_box, precomputed);
}

std::string to_string(SelectionRule rule) {
  return rule == SelectionRule::first_local_max ? "first-local-max" : "tibshirani";
}

SelectionRule selection_rule_from_string(const std::string& name) {
  if (name == "first-local-max") return SelectionRule::first_local_max;
  if (name == "tibshirani") return SelectionRule::tibshirani;
  throw input_error("unknown selection rule: " + name);
}

ClusterCountSelection select_num_clusters(const GapCurve& curve, SelectionRule rule) {
  const auto& pts = curve.points;
  if (pts.size() < 2) throw input_error("selection needs a gap curve with k_max >= 2");
  ClusterCountSelection result;
  result.rule = rule;
  if (rule == SelectionRule::first_local_max) {
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      if (pts[i - 1].gap < pts[i].gap && pts[i].gap >= pts[i + 1].gap) {
        result.n_clusters = pts[i].k;
        return result;
      }
    }
  } else {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      if (pts[i].gap >= pts[i + 1].gap - pts[i + 1].s) {
        result.n_clusters = pts[i].k;
        return result;
      }
    }
  }
  result.n_clusters = pts.back().k;
  result.fell_back_to_k_max = true;
  return result;
}

}  // namespace qcluster
