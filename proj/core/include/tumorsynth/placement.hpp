#pragma once

#include <cstdint>

#include "tumorsynth/grid.hpp"

namespace tumorsynth {

struct PlacementParams {
  int max_attempts = 200;
  /// Forbidden voxels are dilated by this many voxels before testing.
  int vessel_safety_margin_voxels = 1;
  /// Minimum fraction of shape voxels that must fall inside the liver.
  double containment = 1.0;
  std::uint64_t seed = 0;
};

struct PlacementResult {
  /// Volume index of the shape grid's (0,0,0) voxel.
  Index3 offset;
  int attempts = 0;
};

/// Fraction of shape voxels inside `liver` and whether any shape voxel hits
/// `blocked` when the shape is placed at `offset`. Shape voxels outside the
/// volume count as outside the liver.
struct PlacementCheck {
  double liver_fraction = 0.0;
  bool collides = false;
};
PlacementCheck check_placement(const BinaryMask& liver, const BinaryMask& blocked,
                               const BinaryMask& shape, const Index3& offset);

/// Picks a seeded offset for `shape`. Candidate centres are drawn uniformly
/// from liver voxels; a candidate is accepted iff the containment fraction
/// is met and the shape does not touch dilate(forbidden, margin).
/// Errors: Errc::placement_exhausted, Errc::empty_mask,
/// Errc::invalid_argument (shape larger than the liver's bounding box).
PlacementResult select_location(const BinaryMask& liver, const BinaryMask& forbidden,
                                 const BinaryMask& shape, const PlacementParams& params);

}  // namespace tumorsynth
