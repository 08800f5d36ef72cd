#include "qcluster/serial.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace qcluster {

namespace {

// Reals in reports are rounded to 12 significant digits so a re-run
// serializes byte-identically and diffs stay readable.
double canonical_real(double x) {
  if (!std::isfinite(x)) throw compute_error("report contains a non-finite number");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

nlohmann::json real_array(const std::vector<double>& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (double x : v) arr.push_back(canonical_real(x));
  return arr;
}

nlohmann::json real_matrix(const std::vector<std::vector<double>>& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : m) arr.push_back(real_array(row));
  return arr;
}

bool needs_newick_quoting(const std::string& name) {
  for (char ch : name) {
    if (ch == ' ' || ch == ',' || ch == '(' || ch == ')' || ch == ':' || ch == ';' ||
        ch == '\'' || ch == '[' || ch == ']' || ch == '\t')
      return true;
  }
  return name.empty();
}

std::string newick_label(const std::string& name) {
  if (!needs_newick_quoting(name)) return name;
  std::string quoted = "'";
  for (char ch : name) {
    quoted.push_back(ch);
    if (ch == '\'') quoted.push_back('\'');
  }
  quoted.push_back('\'');
  return quoted;
}

std::string format_branch_length(double len) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", len);
  return buf;
}

}  // namespace

void to_json(nlohmann::json& j, const QuestionnaireMatrix& m) {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : m.values) {
    if (v) values.push_back(*v);
    else values.push_back(nullptr);
  }
  j = nlohmann::json{{"n_rows", m.n_rows},       {"n_items", m.n_items},
                     {"scale_min", m.scale_min}, {"scale_max", m.scale_max},
                     {"values", std::move(values)}, {"group_labels", m.group_labels}};
}

void from_json(const nlohmann::json& j, QuestionnaireMatrix& m) {
  m.n_rows = j.at("n_rows").get<std::size_t>();
  m.n_items = j.at("n_items").get<std::size_t>();
  m.scale_min = j.at("scale_min").get<int>();
  m.scale_max = j.at("scale_max").get<int>();
  m.values.clear();
  for (const auto& v : j.at("values")) {
    if (v.is_null()) m.values.emplace_back(std::nullopt);
    else m.values.emplace_back(v.get<double>());
  }
  m.group_labels = j.at("group_labels").get<std::vector<std::string>>();
}

void to_json(nlohmann::json& j, const PreparedMatrix& m) {
  j = nlohmann::json{{"n_rows", m.n_rows},
                     {"n_items", m.n_items},
                     {"values", m.values},
                     {"group_labels", m.group_labels},
                     {"oversampled", m.oversampled}};
}

void from_json(const nlohmann::json& j, PreparedMatrix& m) {
  m.n_rows = j.at("n_rows").get<std::size_t>();
  m.n_items = j.at("n_items").get<std::size_t>();
  m.values = j.at("values").get<std::vector<double>>();
  m.group_labels = j.at("group_labels").get<std::vector<std::string>>();
  m.oversampled = j.at("oversampled").get<std::vector<std::uint8_t>>();
}

void to_json(nlohmann::json& j, const Merge& m) {
  j = nlohmann::json{{"left", m.left}, {"right", m.right}, {"cost", m.cost}, {"size", m.size}};
}

void from_json(const nlohmann::json& j, Merge& m) {
  m.left = j.at("left").get<std::size_t>();
  m.right = j.at("right").get<std::size_t>();
  m.cost = j.at("cost").get<double>();
  m.size = j.at("size").get<std::size_t>();
}

void to_json(nlohmann::json& j, const Dendrogram& d) {
  j = nlohmann::json{{"n_leaves", d.n_leaves}, {"merges", d.merges}};
}

void from_json(const nlohmann::json& j, Dendrogram& d) {
  d.n_leaves = j.at("n_leaves").get<std::size_t>();
  d.merges = j.at("merges").get<std::vector<Merge>>();
}

void to_json(nlohmann::json& j, const ResponseTypeSet& t) {
  j = nlohmann::json{{"n_items", t.n_items}, {"centroids", t.centroids}};
}

void from_json(const nlohmann::json& j, ResponseTypeSet& t) {
  t.n_items = j.at("n_items").get<std::size_t>();
  t.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
}

void to_json(nlohmann::json& j, const Fingerprint& f) {
  j = nlohmann::json{{"group", f.group}, {"weights", f.weights}};
}

void from_json(const nlohmann::json& j, Fingerprint& f) {
  f.group = j.at("group").get<std::string>();
  f.weights = j.at("weights").get<std::vector<double>>();
}

void to_json(nlohmann::json& j, const GapCurve& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.points) {
    pts.push_back(nlohmann::json{{"k", p.k},
                                 {"log_w", p.log_w},
                                 {"ref_mean_log_w", p.ref_mean_log_w},
                                 {"gap", p.gap},
                                 {"s", p.s}});
  }
  j = nlohmann::json{
      {"points", std::move(pts)}, {"n_refs", c.n_refs}, {"seed", c.seed}, {"reference", c.reference}};
}

void from_json(const nlohmann::json& j, GapCurve& c) {
  c.points.clear();
  for (const auto& p : j.at("points")) {
    GapPoint gp;
    gp.k = p.at("k").get<std::size_t>();
    gp.log_w = p.at("log_w").get<double>();
    gp.ref_mean_log_w = p.at("ref_mean_log_w").get<double>();
    gp.gap = p.at("gap").get<double>();
    gp.s = p.at("s").get<double>();
    c.points.push_back(gp);
  }
  c.n_refs = j.at("n_refs").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.reference = j.at("reference").get<std::string>();
}

void to_json(nlohmann::json& j, const NoiseSpec& n) {
  j = nlohmann::json{{"sd", n.sd},
                     {"clamp_low", n.clamp_low},
                     {"clamp_high", n.clamp_high},
                     {"round_to_nearest", n.round_to_nearest}};
}

void from_json(const nlohmann::json& j, NoiseSpec& n) {
  n.sd = j.at("sd").get<double>();
  n.clamp_low = j.at("clamp_low").get<int>();
  n.clamp_high = j.at("clamp_high").get<int>();
  n.round_to_nearest = j.at("round_to_nearest").get<bool>();
}

std::string render_newick(const Dendrogram& dendrogram, const std::vector<std::string>& leaf_names) {
  const std::size_t n = dendrogram.n_leaves;
  if (leaf_names.size() != n)
    throw input_error("dendrogram has " + std::to_string(n) + " leaves, got " +
                      std::to_string(leaf_names.size()) + " names");
  if (n == 1) return newick_label(leaf_names[0]) + ";";

  auto height = [&](std::size_t node) {
    return node < n ? 0.0 : dendrogram.merges[node - n].cost;
  };
  // Iterative bottom-up: the text for node n+i only needs nodes below it.
  std::vector<std::string> text(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i) text[i] = newick_label(leaf_names[i]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Merge& m = dendrogram.merges[i];
    double h = m.cost;
    text[n + i] = "(" + text[m.left] + ":" + format_branch_length(h - height(m.left)) + "," +
                  text[m.right] + ":" + format_branch_length(h - height(m.right)) + ")";
  }
  return text[2 * n - 2] + ";";
}

namespace {

nlohmann::json dendrogram_to_json(const Dendrogram& d) {
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& m : d.merges) {
    merges.push_back(nlohmann::json{{"left", m.left},
                                    {"right", m.right},
                                    {"cost", canonical_real(m.cost)},
                                    {"size", m.size}});
  }
  return nlohmann::json{{"n_leaves", d.n_leaves}, {"merges", std::move(merges)}};
}

}  // namespace

nlohmann::json report_to_json(const AnalysisReport& r) {
  nlohmann::json j;
  j["schema_version"] = r.schema_version;
  j["tool_version"] = r.tool_version;
  nlohmann::json cfg{{"seed", r.config.seed},
                     {"k_impute", r.config.k_impute},
                     {"augment_sd", canonical_real(r.config.augment_sd)},
                     {"max_clusters", r.config.max_clusters},
                     {"gap_refs", r.config.gap_refs},
                     {"select_rule", to_string(r.config.rule)}};
  if (r.config.forced_clusters) cfg["clusters"] = *r.config.forced_clusters;
  else cfg["clusters"] = "auto";
  j["config"] = std::move(cfg);
  j["scale"] = nlohmann::json{{"min", r.scale_min}, {"max", r.scale_max}};
  j["method"] = nlohmann::json{{"linkage", r.linkage},
                               {"gap_reference", r.gap_reference},
                               {"similarity_metric", r.similarity_metric}};
  if (r.gap) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : r.gap->points) {
      pts.push_back(nlohmann::json{{"k", p.k},
                                   {"log_w", canonical_real(p.log_w)},
                                   {"ref_mean_log_w", canonical_real(p.ref_mean_log_w)},
                                   {"gap", canonical_real(p.gap)},
                                   {"s", canonical_real(p.s)}});
    }
    j["gap_curve"] = nlohmann::json{{"points", std::move(pts)},
                                    {"n_refs", r.gap->n_refs},
                                    {"seed", r.gap->seed},
                                    {"reference", r.gap->reference}};
  } else {
    j["gap_curve"] = nullptr;
  }
  j["selection"] = nlohmann::json{{"n_clusters", r.n_clusters},
                                  {"rule", r.selection_rule},
                                  {"warning", r.selection_warning}};
  j["response_types"] =
      nlohmann::json{{"n_items", r.response_types.n_items},
                     {"centroids", real_matrix(r.response_types.centroids)}};
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : r.groups) {
    groups.push_back(nlohmann::json{{"group", g.fingerprint.group},
                                    {"fingerprint", real_array(g.fingerprint.weights)},
                                    {"entropy", canonical_real(g.entropy)},
                                    {"mean", real_array(g.mean)}});
  }
  j["groups"] = std::move(groups);
  j["group_distances"] = real_array(r.group_distances);
  j["group_dendrogram"] = dendrogram_to_json(r.group_dendrogram);
  j["group_newick"] = r.group_newick;
  j["warnings"] = r.warnings;
  return j;
}

AnalysisReport report_from_json(const nlohmann::json& j) {
  AnalysisReport r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    r.tool_version = j.at("tool_version").get<std::string>();
    const auto& cfg = j.at("config");
    r.config.seed = cfg.at("seed").get<std::uint64_t>();
    r.config.k_impute = cfg.at("k_impute").get<std::size_t>();
    r.config.augment_sd = cfg.at("augment_sd").get<double>();
    r.config.max_clusters = cfg.at("max_clusters").get<std::size_t>();
    r.config.gap_refs = cfg.at("gap_refs").get<std::size_t>();
    r.config.rule = selection_rule_from_string(cfg.at("select_rule").get<std::string>());
    if (cfg.at("clusters").is_number())
      r.config.forced_clusters = cfg["clusters"].get<std::size_t>();
    r.scale_min = j.at("scale").at("min").get<int>();
    r.scale_max = j.at("scale").at("max").get<int>();
    r.linkage = j.at("method").at("linkage").get<std::string>();
    r.gap_reference = j.at("method").at("gap_reference").get<std::string>();
    r.similarity_metric = j.at("method").at("similarity_metric").get<std::string>();
    if (!j.at("gap_curve").is_null()) r.gap = j["gap_curve"].get<GapCurve>();
    r.n_clusters = j.at("selection").at("n_clusters").get<std::size_t>();
    r.selection_rule = j.at("selection").at("rule").get<std::string>();
    r.selection_warning = j.at("selection").at("warning").get<bool>();
    r.response_types = j.at("response_types").get<ResponseTypeSet>();
    for (const auto& g : j.at("groups")) {
      GroupSummary s;
      s.fingerprint.group = g.at("group").get<std::string>();
      s.fingerprint.weights = g.at("fingerprint").get<std::vector<double>>();
      s.entropy = g.at("entropy").get<double>();
      s.mean = g.at("mean").get<std::vector<double>>();
      r.groups.push_back(std::move(s));
    }
    r.group_distances = j.at("group_distances").get<std::vector<double>>();
    r.group_dendrogram = j.at("group_dendrogram").get<Dendrogram>();
    r.group_newick = j.at("group_newick").get<std::string>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("report JSON is missing or mistypes a field: ") + e.what());
  }
  return r;
}

nlohmann::json baseline_to_json(const BaselineReport& r) {
  nlohmann::json j;
  j["config"] = nlohmann::json{{"bartlett_alpha", canonical_real(r.config.bartlett_alpha)},
                               {"kmo_gate", canonical_real(r.config.kmo_gate)},
                               {"low_loading", canonical_real(r.config.low_loading)}};
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : r.groups) {
    nlohmann::json jg;
    jg["group"] = g.group;
    jg["bartlett"] = nlohmann::json{{"statistic", canonical_real(g.bartlett.statistic)},
                                    {"df", g.bartlett.df},
                                    {"p", canonical_real(g.bartlett.p)}};
    jg["kmo"] = nlohmann::json{{"overall", canonical_real(g.kmo.overall)},
                               {"per_item", real_array(g.kmo.per_item)}};
    jg["eigenvalues"] = real_array(g.pca.eigenvalues);
    jg["loadings"] = real_matrix(g.pca.loadings);
    jg["n_kaiser_components"] = g.pca.n_kaiser_components;
    jg["cronbach_alpha"] = canonical_real(g.cronbach_alpha);
    jg["verdict"] = g.applicable ? "applicable" : "not-applicable";
    jg["gate_failure"] = g.gate_failure;
    jg["low_loading_items"] = g.low_loading_items;
    groups.push_back(std::move(jg));
  }
  j["groups"] = std::move(groups);
  j["cross_group"] = nlohmann::json{{"ran", r.cross_group_ran},
                                    {"skip_reason", r.cross_group_skip_reason}};
  if (r.cross_group_ran) {
    j["cross_group"]["kruskal_wallis"] =
        nlohmann::json{{"H", canonical_real(r.kruskal_wallis.statistic)},
                       {"df", r.kruskal_wallis.df},
                       {"p", canonical_real(r.kruskal_wallis.p)},
                       {"degenerate", r.kruskal_wallis.degenerate}};
    nlohmann::json dunn = nlohmann::json::array();
    for (const auto& c : r.dunn) {
      dunn.push_back(nlohmann::json{{"group_a", r.groups[c.group_a].group},
                                    {"group_b", r.groups[c.group_b].group},
                                    {"z", canonical_real(c.z)},
                                    {"p_raw", canonical_real(c.p_raw)},
                                    {"p_adjusted", canonical_real(c.p_adjusted)},
                                    {"degenerate", c.degenerate}});
    }
    j["cross_group"]["dunn"] = std::move(dunn);
  }
  return j;
}

std::string canonical_dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json scree_view(const AnalysisReport& report) {
  nlohmann::json arr = nlohmann::json::array();
  if (!report.gap) throw input_error("report carries no gap curve (manual cluster count)");
  for (const auto& p : report.gap->points) {
    arr.push_back(nlohmann::json{
        {"k", p.k}, {"gap", canonical_real(p.gap)}, {"s", canonical_real(p.s)}});
  }
  return arr;
}

nlohmann::json spider_view(const AnalysisReport& report) {
  nlohmann::json fingerprints = nlohmann::json::array();
  for (const auto& g : report.groups) {
    nlohmann::json values = nlohmann::json::array();
    for (std::size_t j = 0; j < g.fingerprint.weights.size(); ++j) {
      values.push_back(nlohmann::json{{"type", j + 1},
                                      {"weight", canonical_real(g.fingerprint.weights[j])}});
    }
    fingerprints.push_back(nlohmann::json{{"group", g.fingerprint.group},
                                          {"values", std::move(values)},
                                          {"radial_range", {0.0, 0.7}}});
  }
  nlohmann::json types = nlohmann::json::array();
  for (std::size_t t = 0; t < report.response_types.size(); ++t) {
    nlohmann::json values = nlohmann::json::array();
    for (std::size_t c = 0; c < report.response_types.n_items; ++c) {
      values.push_back(nlohmann::json{
          {"item", c + 1}, {"value", canonical_real(report.response_types.centroids[t][c])}});
    }
    types.push_back(nlohmann::json{{"type", t + 1},
                                   {"values", std::move(values)},
                                   {"radial_range", {report.scale_min, report.scale_max}}});
  }
  return nlohmann::json{{"fingerprints", std::move(fingerprints)},
                        {"response_types", std::move(types)}};
}

namespace {

std::string svg_header(double width, double height) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out.str();
}

}  // namespace

std::string svg_scree(const AnalysisReport& report) {
  if (!report.gap) throw input_error("report carries no gap curve (manual cluster count)");
  const auto& pts = report.gap->points;
  const double w = 640, h = 400, ml = 60, mr = 20, mt = 20, mb = 40;
  double gmin = pts.front().gap, gmax = pts.front().gap;
  for (const auto& p : pts) {
    gmin = std::min(gmin, p.gap);
    gmax = std::max(gmax, p.gap);
  }
  if (gmax == gmin) gmax = gmin + 1.0;
  auto xof = [&](double k) {
    return ml + (k - 1) / std::max<double>(1, pts.size() - 1) * (w - ml - mr);
  };
  auto yof = [&](double gap) { return h - mb - (gap - gmin) / (gmax - gmin) * (h - mt - mb); };

  std::ostringstream out;
  out << svg_header(w, h);
  out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
      << h - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (const auto& p : pts) out << xof(p.k) << "," << yof(p.gap) << " ";
  out << "\"/>\n";
  for (const auto& p : pts) {
    out << "<circle cx=\"" << xof(p.k) << "\" cy=\"" << yof(p.gap)
        << "\" r=\"3\" fill=\"steelblue\"/>\n";
    out << "<text x=\"" << xof(p.k) << "\" y=\"" << h - mb + 16
        << "\" font-size=\"10\" text-anchor=\"middle\">" << p.k << "</text>\n";
  }
  out << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 8
      << "\" font-size=\"12\" text-anchor=\"middle\">clusters k</text>\n";
  out << "<text x=\"14\" y=\"" << (mt + h - mb) / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << (mt + h - mb) / 2 << ")\">gap</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string svg_dendrogram(const AnalysisReport& report) {
  const Dendrogram& d = report.group_dendrogram;
  const std::size_t n = d.n_leaves;
  if (n == 0) throw input_error("report carries no group dendrogram");
  const double w = 640, h = 400, ml = 40, mr = 20, mt = 20, mb = 60;
  double hmax = d.merges.empty() ? 1.0 : std::max(d.merges.back().cost, 1e-12);

  // Leaf order: left-to-right in-order walk of the tree.
  std::vector<std::size_t> leaf_order;
  leaf_order.reserve(n);
  std::vector<std::size_t> stack{2 * n - 2};
  while (!stack.empty()) {
    std::size_t node = stack.back();
    stack.pop_back();
    if (node < n) {
      leaf_order.push_back(node);
    } else {
      const Merge& m = d.merges[node - n];
      stack.push_back(m.right);
      stack.push_back(m.left);
    }
  }
  std::vector<double> x(2 * n - 1, 0.0), y(2 * n - 1, 0.0);
  for (std::size_t i = 0; i < leaf_order.size(); ++i) {
    x[leaf_order[i]] = ml + (n == 1 ? 0.5 : static_cast<double>(i) / (n - 1)) * (w - ml - mr);
  }
  auto yof = [&](double cost) { return h - mb - cost / hmax * (h - mt - mb); };
  for (std::size_t i = 0; i < n; ++i) y[i] = yof(0.0);

  std::ostringstream out;
  out << svg_header(w, h);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Merge& m = d.merges[i];
    double yy = yof(m.cost);
    out << "<line x1=\"" << x[m.left] << "\" y1=\"" << y[m.left] << "\" x2=\"" << x[m.left]
        << "\" y2=\"" << yy << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << x[m.right] << "\" y1=\"" << y[m.right] << "\" x2=\"" << x[m.right]
        << "\" y2=\"" << yy << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << x[m.left] << "\" y1=\"" << yy << "\" x2=\"" << x[m.right] << "\" y2=\""
        << yy << "\" stroke=\"black\"/>\n";
    x[n + i] = 0.5 * (x[m.left] + x[m.right]);
    y[n + i] = yy;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::string name = i < report.groups.size() ? report.groups[i].fingerprint.group
                                                : std::to_string(i);
    out << "<text x=\"" << x[i] << "\" y=\"" << h - mb + 16
        << "\" font-size=\"11\" text-anchor=\"middle\">" << name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace qcluster
