#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tumorsynth/grid.hpp"
#include "tumorsynth/placement.hpp"
#include "tumorsynth/shape.hpp"
#include "tumorsynth/texture.hpp"
#include "tumorsynth/vessels.hpp"

namespace tumorsynth {

/// Every generator parameter for one tumor.
struct TumorSpec {
  std::string size_class;
  EllipsoidSpec ellipsoid;
  double eccentricity_cap = kDefaultEccentricityCap;
  DeformSpec deform;
  ShapeAcceptance acceptance;
  TextureSpec texture;
  /// Mass-effect strength, in [0, 0.5].
  double mass_effect_strength = 0.2;
  /// Influence radius = influence_factor * equivalent radius.
  double influence_factor = 1.5;
  int capsule_width_voxels = 2;
  double capsule_delta_hu = 20.0;
  double edge_blend_sigma = 1.0;
};

void validate(const TumorSpec& spec);

struct TumorRecord {
  TumorSpec spec;
  Index3 offset;
  Dims shape_dims;
  /// Centroid of the placed tumor, in voxel coordinates.
  std::array<double, 3> center{};
  std::int64_t voxels = 0;
  double equivalent_radius_mm = 0.0;
  double influence_radius_mm = 0.0;
  std::uint64_t deform_seed_used = 0;
  int deform_attempts = 0;
  std::uint64_t placement_seed = 0;
  int placement_attempts = 0;
};

/// Source distance sampled by the radial mass-effect warp for an output
/// voxel at distance `d` from the centre: d * (1 - lambda * (1 - d/R)^2)
/// for d < R, otherwise d.
double mass_effect_source_distance(double d, double lambda, double influence_radius);

/// Radial local-scaling warp that pushes tissue away from `center` (voxel
/// coordinates). Voxels at or beyond alpha * r_eq from the centre, with r_eq
/// the tumor's equivalent-sphere radius, are left untouched. lambda == 0 is
/// an exact identity.
CtVolume apply_mass_effect(const CtVolume& volume, const BinaryMask& tumor,
                           const std::array<double, 3>& center, double lambda, double alpha);

/// dilate(tumor, width) minus erode(tumor, width); empty for width 0.
BinaryMask capsule_rim(const BinaryMask& tumor, int width);

/// Adds `delta` HU to every rim voxel.
CtVolume apply_capsule(const CtVolume& volume, const BinaryMask& tumor, int width, double delta);

struct SynthesisResult {
  CtVolume volume;
  LabelMask label;
  std::vector<TumorRecord> tumors;
  /// Sorted linear indices of each placed tumor.
  std::vector<std::vector<std::int64_t>> tumor_voxels;
};

/// Places and renders `specs` into `host`. Steps: place every tumor (earlier
/// tumors become forbidden regions), warp the host with each mass effect,
/// blend each texture inside its tumor with a Gaussian-feathered weight,
/// then brighten each capsule rim. Tumor i uses placement seed
/// derive_seed(placement.seed, placement stream, i).
/// Errors: Errc::placement_exhausted, shape_rejected, sub_resolution.
SynthesisResult compose_tumors(const CtVolume& host, const BinaryMask& liver,
                               const BinaryMask& vessels, std::span<const TumorSpec> specs,
                               const PlacementParams& placement);

/// Single-tumor pipeline: vessel segmentation, then compose_tumors.
SynthesisResult synthesize_tumor(const CtVolume& host, const BinaryMask& liver,
                                 const TumorSpec& spec, const PlacementParams& placement,
                                 const VesselParams& vessels = {});

/// Voxels a composed tumor may have modified: the open ball of the
/// influence radius around its centre plus dilate(tumor, capsule width).
BinaryMask influence_region(const TumorRecord& record, std::span<const std::int64_t> tumor_voxels,
                            const Dims& dims, const Spacing& spacing);

}  // namespace tumorsynth
