#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tumorsynth/compose.hpp"
#include "tumorsynth/metrics.hpp"
#include "tumorsynth/placement.hpp"
#include "tumorsynth/selection.hpp"
#include "tumorsynth/size_class.hpp"
#include "tumorsynth/vessels.hpp"

namespace tumorsynth {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kGeneratorVersion = "tumorsynth-0.3.0";

struct ShapeDefaults {
  /// sigma_d (voxels) = clamp(per_radius * mean semi-axis in voxels, min, max).
  double sigma_d_min = 2.0;
  double sigma_d_max = 5.0;
  double sigma_d_per_radius = 0.25;
  /// Control spacing is raised to ceil(2 * sigma_d) when that is larger.
  int control_spacing = 8;
  double smooth_sigma = 2.0;
  int max_deform_attempts = 20;
};

struct TextureDefaults {
  int coarse_factor = 4;
  double blur_sigma = 1.0;
  /// mu = liver mean - U[mu_offset_min, mu_offset_max] HU.
  double mu_offset_min = 30.0;
  double mu_offset_max = 60.0;
  /// Fixed noise std; unset means the host liver's measured std.
  std::optional<double> sigma_g;
};

struct PostDefaults {
  double mass_effect_strength = 0.2;
  double influence_factor = 1.5;
  int capsule_width_voxels = 2;
  double capsule_delta_hu = 20.0;
  double edge_blend_sigma = 1.0;
};

struct StreamDefaults {
  int tumors_min = 1;
  int tumors_max = 3;
  /// Resampling budget per item when placement or shape acceptance fails.
  int max_item_attempts = 10;
  std::vector<std::pair<std::string, double>> class_mix{
      {"tiny", 0.25}, {"small", 0.25}, {"medium", 0.25}, {"large", 0.25}};
};

struct ValidationDefaults {
  std::vector<std::string> classes{"small", "medium", "large"};
};

/// Complete run configuration; the JSON form rejects unknown keys.
struct Config {
  int schema_version = kConfigSchemaVersion;
  std::uint64_t seed = 0;
  VesselParams vessel;
  PlacementParams placement;
  ShapeDefaults shape;
  TextureDefaults texture;
  PostDefaults post;
  std::vector<SizeClass> size_classes = default_size_classes();
  StreamDefaults stream;
  ValidationDefaults validation;
  EvalOptions metrics;
  StudyConfig study;
};

/// Errc::config on unknown keys, wrong types or invalid values. Missing
/// keys keep their defaults.
Config config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Config& config);
Config load_config(const std::filesystem::path& path);
void validate(const Config& config);

nlohmann::ordered_json to_json(const TumorSpec& spec);
TumorSpec tumor_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TumorRecord& record);
nlohmann::ordered_json to_json(const StudyResult& result);

}  // namespace tumorsynth
