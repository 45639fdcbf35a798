#pragma once

#include <vector>

#include "tumorsynth/grid.hpp"

namespace tumorsynth {

/// Normalised 1D Gaussian taps, radius ceil(3 sigma). sigma <= 0 gives {1}.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with edge clamping. sigma is in voxels.
VoxelGrid gaussian_blur(const VoxelGrid& grid, double sigma);

/// Catmull-Rom tricubic upsampling: fine voxel i samples the coarse grid at
/// i / factor along each axis. Edge samples clamp.
VoxelGrid upsample_cubic(const VoxelGrid& coarse, const Dims& fine, int factor);

/// Trilinear upsampling with the same coordinate convention as upsample_cubic.
VoxelGrid upsample_linear(const VoxelGrid& coarse, const Dims& fine, int factor);

}  // namespace tumorsynth
