#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qcluster/analysis.hpp"
#include "qcluster/baseline.hpp"
#include "qcluster/csvio.hpp"
#include "qcluster/serial.hpp"
#include "qcluster/synthgen.hpp"

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qcluster::input_error("cannot open " + path + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw qcluster::input_error("cannot open " + path + " for writing");
  out << text;
  if (!out.flush()) throw qcluster::input_error("write to " + path + " failed");
}

struct AnalyzeFlags {
  std::string in_path;
  std::string out_path;
  std::uint64_t seed = 0;
  std::size_t k_impute = 5;
  double aug_sd = 0.1;
  std::size_t max_clusters = 20;
  std::size_t gap_refs = 10;
  std::string clusters = "auto";
  std::string rule = "first-local-max";
};

qcluster::AnalysisConfig to_config(const AnalyzeFlags& flags) {
  qcluster::AnalysisConfig config;
  config.seed = flags.seed;
  config.k_impute = flags.k_impute;
  config.augment_sd = flags.aug_sd;
  config.max_clusters = flags.max_clusters;
  config.gap_refs = flags.gap_refs;
  config.rule = qcluster::selection_rule_from_string(flags.rule);
  if (flags.clusters != "auto") {
    try {
      config.forced_clusters = std::stoul(flags.clusters);
    } catch (const std::exception&) {
      throw qcluster::input_error("--clusters expects \"auto\" or a positive integer, got \"" +
                                  flags.clusters + "\"");
    }
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering-based group comparison for questionnaire data"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset as CSV");
  std::string gen_dataset, gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("--dataset", gen_dataset, "Preset name (d1|d2|d3) or a JSON spec file")
      ->required();
  gen->add_option("--seed", gen_seed, "Master seed (default 0)");
  gen->add_option("--out", gen_out, "Output CSV path")->required();

  // analyze
  auto* ana = app.add_subcommand("analyze", "Run the clustering evaluation end to end");
  AnalyzeFlags af;
  ana->add_option("--in", af.in_path, "Input CSV path")->required();
  ana->add_option("--out", af.out_path, "Output report JSON path")->required();
  ana->add_option("--seed", af.seed, "Seed for preparation and references (default 0)");
  ana->add_option("--k-impute", af.k_impute, "Neighbors for imputation (default 5)");
  ana->add_option("--aug-sd", af.aug_sd, "Augmentation noise sd (default 0.1)");
  ana->add_option("--max-clusters", af.max_clusters, "Largest k scanned (default 20)");
  ana->add_option("--gap-refs", af.gap_refs, "Reference replicates (default 10)");
  ana->add_option("--clusters", af.clusters, "\"auto\" or a fixed cluster count");
  ana->add_option("--select-rule", af.rule, "first-local-max (default) or tibshirani");

  // baseline
  auto* base = app.add_subcommand("baseline", "Run the classical comparison pipeline");
  std::string base_in, base_out;
  bool base_impute = false;
  std::size_t base_k = 5;
  base->add_option("--in", base_in, "Input CSV path")->required();
  base->add_option("--out", base_out, "Output report JSON path")->required();
  base->add_flag("--impute", base_impute, "Impute missing cells before testing");
  base->add_option("--k-impute", base_k, "Neighbors for --impute (default 5)");

  // report
  auto* rep = app.add_subcommand("report", "Render views of an analysis report");
  std::string rep_in, rep_format, rep_out;
  rep->add_option("--in", rep_in, "Analysis report JSON path")->required();
  rep->add_option("--format", rep_format, "newick | scree | spider | svg")->required();
  rep->add_option("--out", rep_out, "Output path (svg: used as prefix); stdout if omitted");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      qcluster::DatasetSpec spec =
          qcluster::is_preset_name(gen_dataset)
              ? qcluster::preset_dataset(gen_dataset, gen_seed)
              : qcluster::parse_dataset_spec(read_text_file(gen_dataset), gen_seed);
      qcluster::write_csv_file(gen_out, qcluster::generate_dataset(spec));
    } else if (ana->parsed()) {
      qcluster::QuestionnaireMatrix matrix = qcluster::read_csv_file(af.in_path);
      qcluster::AnalysisReport report = qcluster::analyze(matrix, to_config(af));
      write_text_file(af.out_path, qcluster::canonical_dump(qcluster::report_to_json(report)));
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    } else if (base->parsed()) {
      qcluster::QuestionnaireMatrix matrix = qcluster::read_csv_file(base_in);
      if (!matrix.complete()) {
        if (!base_impute)
          throw qcluster::input_error(
              "input has missing cells; pass --impute or run analyze-style imputation first");
        matrix = qcluster::knn_impute(matrix, base_k).matrix;
      }
      qcluster::BaselineReport report = qcluster::classical_pipeline(matrix);
      write_text_file(base_out, qcluster::canonical_dump(qcluster::baseline_to_json(report)));
    } else if (rep->parsed()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_text_file(rep_in));
      } catch (const nlohmann::json::exception& e) {
        throw qcluster::input_error(std::string("report file is not valid JSON: ") + e.what());
      }
      qcluster::AnalysisReport report = qcluster::report_from_json(j);
      std::string text;
      if (rep_format == "newick") {
        text = report.group_newick + "\n";
      } else if (rep_format == "scree") {
        text = qcluster::canonical_dump(qcluster::scree_view(report));
      } else if (rep_format == "spider") {
        text = qcluster::canonical_dump(qcluster::spider_view(report));
      } else if (rep_format == "svg") {
        if (rep_out.empty()) throw qcluster::input_error("--format svg requires --out PREFIX");
        if (report.gap) write_text_file(rep_out + ".scree.svg", qcluster::svg_scree(report));
        write_text_file(rep_out + ".dendrogram.svg", qcluster::svg_dendrogram(report));
        return 0;
      } else {
        throw qcluster::input_error("unknown report format: " + rep_format);
      }
      if (rep_out.empty()) std::cout << text;
      else write_text_file(rep_out, text);
    }
  } catch (const qcluster::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const qcluster::compute_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
