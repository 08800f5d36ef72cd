#include "qcluster/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <nlohmann/json.hpp>

namespace qcluster {

namespace {

// Substream purpose tags; any fixed distinct constants work.
constexpr std::uint64_t kTagSample = 0x5A11;
constexpr std::uint64_t kTagNoise = 0x401E;

MixtureComponent dirac(double w, std::vector<int> v) { return MixtureComponent{w, std::move(v)}; }
MixtureComponent dirac_const(double w, int x, std::size_t d) {
  return MixtureComponent{w, std::vector<int>(d, x)};
}
MixtureComponent uniform(double w) { return MixtureComponent{w, {}}; }

MixtureLaw law_of(std::size_t d, std::vector<MixtureComponent> comps) {
  return MixtureLaw{d, 1, 5, std::move(comps)};
}

// Constant-base mixtures on seven items: four groups whose answers share one
// base score per questionnaire, differing only in how that base is chosen.
std::vector<MixtureLaw> seven_item_laws() {
  const std::size_t d = 7;
  std::vector<MixtureLaw> laws;
  laws.push_back(law_of(d, {dirac_const(0.25, 5, d), dirac_const(0.55, 4, d),
                            dirac_const(0.15, 3, d), uniform(0.05)}));
  laws.push_back(law_of(d, {dirac_const(0.25, 4, d), dirac_const(0.45, 3, d),
                            dirac_const(0.25, 2, d), uniform(0.05)}));
  laws.push_back(law_of(d, {dirac_const(0.19, 5, d), dirac_const(0.19, 4, d),
                            dirac_const(0.19, 3, d), dirac_const(0.19, 2, d),
                            dirac_const(0.19, 1, d), uniform(0.05)}));
  laws.push_back(law_of(d, {dirac_const(0.3, 5, d), dirac_const(0.175, 4, d),
                            dirac_const(0.175, 2, d), dirac_const(0.3, 1, d), uniform(0.05)}));
  return laws;
}

// Three more seven-item groups with one item answered off-pattern.
std::vector<MixtureLaw> seven_item_offpattern_laws() {
  const std::size_t d = 7;
  std::vector<MixtureLaw> laws;
  laws.push_back(law_of(d, {dirac(0.24, {5, 5, 5, 5, 5, 5, 1}), dirac(0.24, {5, 5, 5, 5, 5, 5, 2}),
                            dirac(0.24, {4, 4, 4, 4, 4, 4, 2}), dirac(0.24, {4, 4, 4, 4, 4, 4, 1}),
                            uniform(0.04)}));
  laws.push_back(law_of(d, {dirac(0.32, {1, 1, 1, 4, 1, 1, 1}), dirac(0.32, {3, 3, 3, 5, 3, 3, 3}),
                            dirac(0.32, {2, 2, 2, 5, 2, 2, 2}), uniform(0.04)}));
  laws.push_back(law_of(d, {dirac(0.12, {5, 5, 5, 5, 5, 5, 2}), dirac(0.12, {5, 5, 5, 4, 5, 5, 1}),
                            dirac(0.12, {4, 4, 4, 4, 4, 4, 1}), dirac(0.12, {4, 4, 4, 5, 4, 4, 2}),
                            dirac(0.12, {2, 2, 2, 4, 2, 2, 1}), dirac(0.12, {2, 2, 2, 5, 2, 2, 1}),
                            dirac(0.12, {1, 1, 1, 5, 1, 1, 1}), dirac(0.12, {1, 1, 1, 4, 1, 1, 1}),
                            uniform(0.04)}));
  return laws;
}

// Three-item groups built from six base patterns with per-group weightings.
std::vector<MixtureLaw> three_item_laws() {
  const std::size_t d = 3;
  const std::vector<std::vector<int>> base = {{5, 3, 1}, {1, 3, 5}, {3, 3, 3},
                                              {5, 1, 3}, {1, 5, 3}, {3, 5, 1}};
  auto make = [&](const std::vector<double>& w, double uw) {
    std::vector<MixtureComponent> comps;
    for (std::size_t i = 0; i < base.size(); ++i) comps.push_back(dirac(w[i], base[i]));
    comps.push_back(uniform(uw));
    return law_of(d, std::move(comps));
  };
  std::vector<MixtureLaw> laws;
  laws.push_back(make({0.16, 0.16, 0.16, 0.16, 0.16, 0.16}, 0.04));
  laws.push_back(make({0.4, 0.02, 0.12, 0.4, 0.02, 0.02}, 0.02));
  laws.push_back(make({0.06, 0.4, 0.04, 0.02, 0.4, 0.06}, 0.02));
  laws.push_back(make({0.07, 0.07, 0.07, 0.07, 0.35, 0.35}, 0.02));
  return laws;
}

constexpr std::size_t kPresetGroupSize = 1000;

DatasetSpec spec_from_laws(std::vector<MixtureLaw> laws, std::size_t first_group_number,
                           double noise_sd, std::uint64_t seed) {
  DatasetSpec spec;
  spec.noise = NoiseSpec{noise_sd, 1, 5, true};
  spec.seed = seed;
  for (std::size_t i = 0; i < laws.size(); ++i) {
    spec.groups.push_back(GroupSpec{std::to_string(first_group_number + i), kPresetGroupSize,
                                    std::move(laws[i])});
  }
  return spec;
}

}  // namespace

void validate_law(const MixtureLaw& law) {
  if (law.n_items == 0) throw input_error("mixture law needs at least one item");
  if (law.components.empty()) throw input_error("mixture law has no components");
  double total = 0.0;
  for (const auto& comp : law.components) {
    if (comp.weight < 0.0 || comp.weight > 1.0)
      throw input_error("component weight " + std::to_string(comp.weight) + " outside [0, 1]");
    total += comp.weight;
    if (comp.is_uniform()) continue;
    if (comp.dirac.size() != law.n_items)
      throw input_error("point-mass vector has " + std::to_string(comp.dirac.size()) +
                        " coordinates, law has " + std::to_string(law.n_items) + " items");
    for (int x : comp.dirac) {
      if (x < law.scale_min || x > law.scale_max)
        throw input_error("point-mass coordinate " + std::to_string(x) + " outside scale [" +
                          std::to_string(law.scale_min) + ", " + std::to_string(law.scale_max) + "]");
    }
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw input_error("component weights sum to " + std::to_string(total) + ", expected 1");
}

void validate_spec(const DatasetSpec& spec) {
  if (spec.groups.empty()) throw input_error("dataset spec has no groups");
  if (spec.noise.sd < 0.0) throw input_error("noise sd must be nonnegative");
  if (spec.noise.clamp_low >= spec.noise.clamp_high)
    throw input_error("noise clamp bounds must satisfy clamp_low < clamp_high");
  const std::size_t d = spec.groups.front().law.n_items;
  for (const auto& g : spec.groups) {
    if (g.label.empty()) throw input_error("group label must be non-empty");
    if (g.n_samples == 0) throw input_error("group " + g.label + " has zero samples");
    if (g.law.n_items != d) throw input_error("all groups must share the same item count");
    validate_law(g.law);
  }
}

std::vector<int> sample_group(const MixtureLaw& law, std::size_t n, std::uint64_t seed) {
  validate_law(law);
  if (n == 0) throw input_error("cannot sample an empty group");
  const std::size_t d = law.n_items;
  std::vector<int> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(derive_seed(seed, kTagSample, i));
    double u = rng.next_unit();
    const MixtureComponent* chosen = &law.components.back();
    double cum = 0.0;
    for (const auto& comp : law.components) {
      cum += comp.weight;
      if (u < cum) {
        chosen = &comp;
        break;
      }
    }
    int* row = out.data() + i * d;
    if (chosen->is_uniform()) {
      for (std::size_t j = 0; j < d; ++j) row[j] = rng.next_int(law.scale_min, law.scale_max);
    } else {
      std::copy(chosen->dirac.begin(), chosen->dirac.end(), row);
    }
  }
  return out;
}

double perturb(int x, const NoiseSpec& noise, RngStream& rng) {
  double y = x + noise.sd * rng.next_gaussian();
  if (noise.round_to_nearest) y = static_cast<double>(std::llround(y));
  return std::min(static_cast<double>(noise.clamp_high),
                  std::max(static_cast<double>(noise.clamp_low), y));
}

QuestionnaireMatrix generate_dataset(const DatasetSpec& spec) {
  validate_spec(spec);
  const std::size_t d = spec.n_items();
  QuestionnaireMatrix out;
  out.n_items = d;
  out.scale_min = spec.scale_min;
  out.scale_max = spec.scale_max;
  for (std::size_t gi = 0; gi < spec.groups.size(); ++gi) {
    const auto& group = spec.groups[gi];
    std::vector<int> raw = sample_group(group.law, group.n_samples, derive_seed(spec.seed, kTagSample, gi));
    for (std::size_t r = 0; r < group.n_samples; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        RngStream cell(derive_seed(spec.seed, kTagNoise, gi, r, c));
        out.values.push_back(perturb(raw[r * d + c], spec.noise, cell));
      }
      out.group_labels.push_back(group.label);
    }
    out.n_rows += group.n_samples;
  }
  return out;
}

bool is_preset_name(std::string_view name) { return name == "d1" || name == "d2" || name == "d3"; }

DatasetSpec preset_dataset(std::string_view name, std::uint64_t seed) {
  const double f_sd = 0.66;  // low lattice noise
  if (name == "d1") return spec_from_laws(seven_item_laws(), 1, f_sd, seed);
  if (name == "d2") {
    auto laws = seven_item_laws();
    auto extra = seven_item_offpattern_laws();
    laws.insert(laws.end(), std::make_move_iterator(extra.begin()),
                std::make_move_iterator(extra.end()));
    return spec_from_laws(std::move(laws), 1, f_sd, seed);
  }
  if (name == "d3") return spec_from_laws(three_item_laws(), 8, 1.0, seed);
  throw input_error("unknown preset dataset: " + std::string(name));
}

DatasetSpec parse_dataset_spec(const std::string& json_text, std::uint64_t seed) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("dataset spec is not valid JSON: ") + e.what());
  }
  try {
    DatasetSpec spec;
    spec.seed = seed;
    const std::size_t d = j.at("items").get<std::size_t>();
    if (j.contains("scale")) {
      spec.scale_min = j["scale"].at("min").get<int>();
      spec.scale_max = j["scale"].at("max").get<int>();
    }
    spec.noise = NoiseSpec{j.at("noise").at("sd").get<double>(), spec.scale_min, spec.scale_max,
                           j["noise"].value("round", true)};
    for (const auto& jg : j.at("groups")) {
      GroupSpec g;
      g.label = jg.at("label").get<std::string>();
      g.n_samples = jg.at("n").get<std::size_t>();
      g.law.n_items = d;
      g.law.scale_min = spec.scale_min;
      g.law.scale_max = spec.scale_max;
      for (const auto& jc : jg.at("law")) {
        MixtureComponent comp;
        comp.weight = jc.at("weight").get<double>();
        if (jc.contains("dirac")) comp.dirac = jc["dirac"].get<std::vector<int>>();
        else if (!jc.value("uniform", false))
          throw input_error("mixture component needs either \"dirac\" or \"uniform\": true");
        g.law.components.push_back(std::move(comp));
      }
      spec.groups.push_back(std::move(g));
    }
    validate_spec(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("dataset spec is missing or mistypes a field: ") + e.what());
  }
}

}  // namespace qcluster
