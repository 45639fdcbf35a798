#include "tumorsynth/vessels.hpp"

#include <cmath>

#include "tumorsynth/components.hpp"

namespace tumorsynth {

IntensityStats masked_stats(const VoxelGrid& volume, const BinaryMask& region) {
  require_same_dims(volume.dims(), region.dims(), "masked_stats");
  IntensityStats s;
  double sum = 0.0;
  for (std::int64_t i = 0; i < volume.size(); ++i) {
    if (!region.test(i)) continue;
    sum += volume[i];
    ++s.count;
  }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (std::int64_t i = 0; i < volume.size(); ++i) {
    if (region.test(i)) ss += (volume[i] - s.mean) * (volume[i] - s.mean);
  }
  s.stddev = std::sqrt(ss / static_cast<double>(s.count));
  return s;
}

BinaryMask segment_vessels(const CtVolume& volume, const BinaryMask& liver,
                           const VesselParams& params) {
  require_same_dims(volume.dims(), liver.dims(), "segment_vessels");
  if (params.k_sigma <= 0.0) throw Error(Errc::invalid_argument, "k_sigma must be positive");
  if (params.min_component_voxels < 0) {
    throw Error(Errc::invalid_argument, "min_component_voxels must be >= 0");
  }

  double threshold = params.absolute_hu;
  if (params.mode == VesselMode::relative) {
    const IntensityStats stats = masked_stats(volume.grid, liver);
    if (stats.count == 0) throw Error(Errc::empty_mask, "liver mask is empty");
    threshold = stats.mean + params.k_sigma * stats.stddev;
  } else if (!liver.any()) {
    throw Error(Errc::empty_mask, "liver mask is empty");
  }

  BinaryMask vessels(liver.dims(), liver.spacing());
  for (std::int64_t i = 0; i < liver.size(); ++i) {
    if (liver.test(i) && volume.grid[i] > threshold) vessels.set(i);
  }
  return remove_small_components(vessels, params.min_component_voxels, Connectivity::twentysix);
}

}  // namespace tumorsynth
