#pragma once

#include <cstdint>
#include <vector>

#include "tumorsynth/grid.hpp"

namespace tumorsynth {

enum class Connectivity { six = 6, twentysix = 26 };

struct Component {
  /// Ascending linear indices; voxels.front() is the component's minimum index.
  std::vector<std::int64_t> voxels;

  std::int64_t count() const { return static_cast<std::int64_t>(voxels.size()); }
  BinaryMask to_mask(const Dims& dims, const Spacing& spacing) const;
};

/// Neighbour offsets for the given connectivity, excluding the origin.
std::vector<Index3> neighbor_offsets(Connectivity connectivity);

/// Components ordered by their minimum linear voxel index.
std::vector<Component> connected_components(const BinaryMask& mask,
                                             Connectivity connectivity = Connectivity::twentysix);

BinaryMask remove_small_components(const BinaryMask& mask, std::int64_t min_voxels,
                                   Connectivity connectivity = Connectivity::twentysix);

std::int64_t count_components(const BinaryMask& mask,
                              Connectivity connectivity = Connectivity::twentysix);

/// Radius of the sphere with the same physical volume as `voxels` voxels.
double equivalent_radius_mm(std::int64_t voxels, const Spacing& spacing);

/// Smallest box containing all foreground voxels. Empty masks yield an
/// empty extent.
struct ForegroundBounds {
  Index3 lo;
  Index3 hi;  // inclusive
  bool empty = true;
};
ForegroundBounds foreground_bounds(const BinaryMask& mask);

/// Crops to the foreground bounding box; `origin` receives the box corner.
BinaryMask crop_to_foreground(const BinaryMask& mask, Index3* origin = nullptr);

}  // namespace tumorsynth
