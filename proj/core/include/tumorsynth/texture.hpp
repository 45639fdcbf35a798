#pragma once

#include <cstdint>

#include "tumorsynth/grid.hpp"

namespace tumorsynth {

struct TextureSpec {
  /// Target mean attenuation in HU.
  double mu = 90.0;
  /// Noise standard deviation in HU.
  double sigma_g = 25.0;
  /// Noise is drawn on a grid 1/coarse_factor as fine, then upsampled.
  int coarse_factor = 4;
  /// Final blur, in voxels.
  double blur_sigma = 1.0;
  std::uint64_t seed = 0;
};

/// Coarse i.i.d. Gaussian grid -> Catmull-Rom tricubic upsampling ->
/// Gaussian blur, offset to mean mu. sigma_g == 0 gives exactly mu.
VoxelGrid generate_texture(const Dims& dims, const TextureSpec& spec,
                           const Spacing& spacing = Spacing{});

}  // namespace tumorsynth
