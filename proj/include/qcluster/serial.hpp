#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcluster/analysis.hpp"
#include "qcluster/baseline.hpp"
#include "qcluster/core.hpp"

namespace qcluster {

// Round-trip JSON for the domain types (full double precision).
void to_json(nlohmann::json& j, const QuestionnaireMatrix& m);
void from_json(const nlohmann::json& j, QuestionnaireMatrix& m);
void to_json(nlohmann::json& j, const PreparedMatrix& m);
void from_json(const nlohmann::json& j, PreparedMatrix& m);
void to_json(nlohmann::json& j, const Merge& m);
void from_json(const nlohmann::json& j, Merge& m);
void to_json(nlohmann::json& j, const Dendrogram& d);
void from_json(const nlohmann::json& j, Dendrogram& d);
void to_json(nlohmann::json& j, const ResponseTypeSet& t);
void from_json(const nlohmann::json& j, ResponseTypeSet& t);
void to_json(nlohmann::json& j, const Fingerprint& f);
void from_json(const nlohmann::json& j, Fingerprint& f);
void to_json(nlohmann::json& j, const GapCurve& c);
void from_json(const nlohmann::json& j, GapCurve& c);
void to_json(nlohmann::json& j, const NoiseSpec& n);
void from_json(const nlohmann::json& j, NoiseSpec& n);

/// Parenthesized tree text with branch lengths; heights are raw merge costs.
std::string render_newick(const Dendrogram& dendrogram, const std::vector<std::string>& leaf_names);

/// Canonical report encodings: sorted keys, reals rounded to 12 significant
/// digits, so identical runs serialize byte-identically.
nlohmann::json report_to_json(const AnalysisReport& report);
AnalysisReport report_from_json(const nlohmann::json& j);
nlohmann::json baseline_to_json(const BaselineReport& report);

std::string canonical_dump(const nlohmann::json& j);

// Views over a finished report.
nlohmann::json scree_view(const AnalysisReport& report);
nlohmann::json spider_view(const AnalysisReport& report);
std::string svg_scree(const AnalysisReport& report);
std::string svg_dendrogram(const AnalysisReport& report);

}  // namespace qcluster
