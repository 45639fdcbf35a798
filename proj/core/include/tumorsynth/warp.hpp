#pragma once

#include "tumorsynth/grid.hpp"

namespace tumorsynth {

enum class Interpolation { nearest, trilinear };

struct Vec3f {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  friend bool operator==(const Vec3f&, const Vec3f&) = default;
};

/// Per-voxel displacement in voxel units. The output voxel p samples the
/// input at p + field(p).
using DisplacementField = Grid<Vec3f>;

/// Axis-aligned voxel box [origin, origin + extent).
struct Box {
  Index3 origin;
  Dims extent;
};

/// Samples `volume` at a continuous voxel coordinate. Out-of-range
/// coordinates clamp to the nearest in-bounds voxel.
float sample(const VoxelGrid& volume, double x, double y, double z, Interpolation interpolation);

/// Trilinear sample of a vector field, clamped like sample().
Vec3f sample_vector(const DisplacementField& field, double x, double y, double z);

VoxelGrid warp_by_displacement(const VoxelGrid& volume, const DisplacementField& field,
                               Interpolation interpolation);

/// Warps only the voxels of `box`; `field` has the box's extent. Voxels
/// outside the box are copied unchanged. Sampling reads the whole volume.
VoxelGrid warp_region(const VoxelGrid& volume, const Box& box, const DisplacementField& field,
                      Interpolation interpolation);

}  // namespace tumorsynth
