#pragma once

#include <vector>

#include "tumorsynth/grid.hpp"

namespace tumorsynth {

/// Offsets inside the Euclidean ball x^2 + y^2 + z^2 <= radius^2 (voxel units).
/// Radius 1 yields the 6-neighbourhood plus the centre.
std::vector<Index3> ball_offsets(int radius);

/// Binary dilation by a voxel-unit ball. Foreground pushed past the grid
/// edge is dropped.
BinaryMask dilate(const BinaryMask& mask, int radius);

/// Binary erosion by a voxel-unit ball. Neighbours outside the grid are
/// ignored, so erode(dilate(M, r), r) always contains M.
BinaryMask erode(const BinaryMask& mask, int radius);

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_difference(const BinaryMask& a, const BinaryMask& b);

}  // namespace tumorsynth
