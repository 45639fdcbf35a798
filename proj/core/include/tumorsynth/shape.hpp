#pragma once

#include <cstdint>
#include <optional>

#include "tumorsynth/grid.hpp"
#include "tumorsynth/warp.hpp"

namespace tumorsynth {

/// Semi-axis lengths in millimetres along x, y, z.
struct EllipsoidSpec {
  double a = 5.0;
  double b = 5.0;
  double c = 5.0;
};

struct DeformSpec {
  /// Displacement standard deviation at control points, in voxels.
  double sigma_d = 0.0;
  /// Voxels between displacement control points.
  int control_spacing = 8;
  /// Gaussian smoothing of the control field, expressed in fine voxels.
  double smooth_sigma = 2.0;
  std::uint64_t seed = 0;
};

inline constexpr double kDefaultEccentricityCap = 3.0;

/// Voxelised ellipsoid on its tight, odd-sized bounding grid. A voxel is
/// foreground iff its centre satisfies (x/a)^2 + (y/b)^2 + (z/c)^2 <= 1.
/// Errors: Errc::sub_resolution if any semi-axis spans less than one voxel;
/// Errc::invalid_argument for non-positive axes or eccentricity above `cap`.
BinaryMask make_ellipsoid(const EllipsoidSpec& spec, const Spacing& spacing,
                          double eccentricity_cap = kDefaultEccentricityCap);

/// Voxels of padding added on every side by elastic_deform.
int deform_padding(double sigma_d);

/// Smooth random displacement field of the given dims: i.i.d. Gaussian
/// control vectors, Gaussian-smoothed, trilinearly upsampled.
DisplacementField make_elastic_field(const Dims& dims, const DeformSpec& spec);

/// Scaling and squaring: treats `velocity` as a stationary velocity field
/// and returns the displacement of its time-1 flow, which does not fold.
DisplacementField exponentiate_field(const DisplacementField& velocity);

/// Elastic deformation of a mask onto a grid padded by deform_padding()
/// voxels per side. The elastic field is exponentiated, the mask is warped
/// trilinearly, rescaled isotropically about its centroid to the input
/// volume, then thresholded at 0.5. sigma_d == 0 returns the input unchanged.
BinaryMask elastic_deform(const BinaryMask& mask, const DeformSpec& spec);

struct ShapeAcceptance {
  int max_attempts = 20;
  /// Optional bounds on the deformed shape's equivalent-sphere radius.
  std::optional<double> min_radius_mm;
  std::optional<double> max_radius_mm;
  /// When false, a radius equal to max_radius_mm is rejected.
  bool max_inclusive = false;
};

struct DeformedShape {
  BinaryMask mask;
  std::uint64_t seed_used = 0;
  int attempts = 0;
};

/// Retries elastic_deform with seed, seed+1, ... until the result is a
/// single 26-connected component inside the radius bounds.
/// Errors: Errc::shape_rejected once max_attempts are exhausted.
DeformedShape deform_single_component(const BinaryMask& mask, const DeformSpec& spec,
                                      const ShapeAcceptance& acceptance = {});

}  // namespace tumorsynth
