#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qcluster/core.hpp"
#include "qcluster/rng.hpp"

namespace qcluster {

/// One mixture component: either a fixed answer vector (point mass) or,
/// when `dirac` is empty, i.i.d. uniform scores over the scale.
struct MixtureComponent {
  double weight = 0.0;
  std::vector<int> dirac;

  bool is_uniform() const { return dirac.empty(); }
};

struct MixtureLaw {
  std::size_t n_items = 0;
  int scale_min = 1;
  int scale_max = 5;
  std::vector<MixtureComponent> components;
};

/// Throws input_error unless weights sum to 1 (within 1e-9), every point
/// mass has n_items in-scale coordinates, and there is at least one component.
void validate_law(const MixtureLaw& law);

struct GroupSpec {
  std::string label;
  std::size_t n_samples = 0;
  MixtureLaw law;
};

struct DatasetSpec {
  std::vector<GroupSpec> groups;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  int scale_min = 1;
  int scale_max = 5;

  std::size_t n_items() const { return groups.empty() ? 0 : groups.front().law.n_items; }
};

void validate_spec(const DatasetSpec& spec);

/// Draws n rows i.i.d. from the mixture, pre-noise. Row-major n x n_items.
/// Deterministic given the seed; rows are independent substreams.
std::vector<int> sample_group(const MixtureLaw& law, std::size_t n, std::uint64_t seed);

/// Adds sd-scaled gaussian noise, optionally rounds to the nearest integer
/// (half away from zero), and clamps into [clamp_low, clamp_high]. With
/// rounding enabled the result is integral.
double perturb(int x, const NoiseSpec& noise, RngStream& rng);

/// Samples every group, perturbs each cell on its own substream, and attaches
/// group labels. Bit-identical output for a given spec.
QuestionnaireMatrix generate_dataset(const DatasetSpec& spec);

bool is_preset_name(std::string_view name);

/// Built-in datasets "d1", "d2", "d3": mixtures of point masses on constant
/// or patterned answer vectors plus a small uniform share, perturbed by
/// integer-lattice gaussian noise.
DatasetSpec preset_dataset(std::string_view name, std::uint64_t seed);

/// Parses a declarative dataset description (JSON text, see README).
DatasetSpec parse_dataset_spec(const std::string& json_text, std::uint64_t seed);

}  // namespace qcluster
