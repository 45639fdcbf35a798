#pragma once

#include <cstdint>

#include "tumorsynth/grid.hpp"

namespace tumorsynth {

enum class VesselMode { relative, absolute };

struct VesselParams {
  VesselMode mode = VesselMode::relative;
  /// Relative mode: threshold = liver mean + k_sigma * liver std.
  double k_sigma = 2.0;
  /// Absolute mode threshold in HU.
  double absolute_hu = 150.0;
  /// 26-connected components smaller than this are dropped.
  std::int64_t min_component_voxels = 20;
};

struct IntensityStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::int64_t count = 0;
};

/// Mean and population standard deviation of `volume` over `region`.
IntensityStats masked_stats(const VoxelGrid& volume, const BinaryMask& region);

/// Hyperdense voxels inside the liver. A voxel is a vessel iff its HU
/// strictly exceeds the threshold; the result is always a subset of `liver`.
BinaryMask segment_vessels(const CtVolume& volume, const BinaryMask& liver,
                           const VesselParams& params);

}  // namespace tumorsynth
