#pragma once

#include "tumorsynth/grid.hpp"

namespace tumorsynth {

/// Intensity window applied before model inference.
struct PreprocessParams {
  float clip_min = -21.0f;
  float clip_max = 189.0f;
  bool normalize = false;
};

/// Clips to [clip_min, clip_max]; with `normalize`, rescales to zero mean
/// and unit (population) standard deviation. A constant volume cannot be
/// normalised and raises Errc::zero_variance.
VoxelGrid preprocess(const CtVolume& volume, const PreprocessParams& params);

}  // namespace tumorsynth
