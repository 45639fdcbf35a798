#include "tumorsynth/compose.hpp"

#include <algorithm>
#include <cmath>

#include "tumorsynth/components.hpp"
#include "tumorsynth/filters.hpp"
#include "tumorsynth/morphology.hpp"
#include "tumorsynth/random.hpp"
#include "tumorsynth/warp.hpp"

namespace tumorsynth {
namespace {

struct PlacedTumor {
  BinaryMask shape;  // cropped deformed shape
  Index3 offset;
  std::vector<std::int64_t> voxels;
  std::array<double, 3> center{};
  TumorRecord record;
};

BinaryMask voxels_to_mask(std::span<const std::int64_t> voxels, const Dims& dims,
                          const Spacing& spacing) {
  BinaryMask m(dims, spacing);
  for (auto i : voxels) m.set(i);
  return m;
}

// Blend weights in the shape's own grid: the tumor indicator blurred by
// sigma on a zero-padded canvas so the box edge does not bias the weights.
VoxelGrid blend_weights(const BinaryMask& shape, double sigma) {
  const Dims& d = shape.dims();
  VoxelGrid w(d, shape.spacing(), 0.0f);
  if (!(sigma > 0.0)) {
    for (std::int64_t i = 0; i < w.size(); ++i) w[i] = shape.test(i) ? 1.0f : 0.0f;
    return w;
  }
  const int pad = static_cast<int>(std::ceil(3.0 * sigma)) + 1;
  const Dims pd{d.nx + 2 * pad, d.ny + 2 * pad, d.nz + 2 * pad};
  VoxelGrid canvas(pd, shape.spacing(), 0.0f);
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (shape.test(x, y, z)) canvas(x + pad, y + pad, z + pad) = 1.0f;
      }
    }
  }
  const VoxelGrid blurred = gaussian_blur(canvas, sigma);
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x) w(x, y, z) = blurred(x + pad, y + pad, z + pad);
    }
  }
  return w;
}

double distance_mm(double x, double y, double z, const std::array<double, 3>& center,
                   const Spacing& s) {
  const double dx = (x - center[0]) * s.sx;
  const double dy = (y - center[1]) * s.sy;
  const double dz = (z - center[2]) * s.sz;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

void validate(const TumorSpec& spec) {
  if (!(spec.mass_effect_strength >= 0.0 && spec.mass_effect_strength <= 0.5)) {
    throw Error(Errc::invalid_argument, "mass_effect_strength must lie in [0, 0.5]");
  }
  if (!(spec.influence_factor >= 1.0)) {
    throw Error(Errc::invalid_argument, "influence_factor must be >= 1");
  }
  if (spec.capsule_width_voxels < 0) {
    throw Error(Errc::invalid_argument, "capsule_width_voxels must be >= 0");
  }
  if (spec.edge_blend_sigma < 0.0) {
    throw Error(Errc::invalid_argument, "edge_blend_sigma must be >= 0");
  }
  if (spec.deform.sigma_d < 0.0 || spec.deform.control_spacing < 2) {
    throw Error(Errc::invalid_argument, "invalid deformation parameters");
  }
  if (spec.texture.sigma_g < 0.0 || spec.texture.coarse_factor < 1) {
    throw Error(Errc::invalid_argument, "invalid texture parameters");
  }
}

double mass_effect_source_distance(double d, double lambda, double influence_radius) {
  if (d >= influence_radius) return d;
  const double t = 1.0 - d / influence_radius;
  return d * (1.0 - lambda * t * t);
}

CtVolume apply_mass_effect(const CtVolume& volume, const BinaryMask& tumor,
                           const std::array<double, 3>& center, double lambda, double alpha) {
  require_same_dims(volume.dims(), tumor.dims(), "apply_mass_effect");
  if (!(lambda >= 0.0 && lambda <= 0.5)) {
    throw Error(Errc::invalid_argument, "mass-effect strength must lie in [0, 0.5]");
  }
  if (!(alpha >= 1.0)) throw Error(Errc::invalid_argument, "influence factor must be >= 1");
  if (lambda == 0.0) return volume;
  const double r_eq = equivalent_radius_mm(tumor.count(), volume.spacing());
  const double radius = alpha * r_eq;
  if (!(radius > 0.0)) return volume;

  const Spacing& s = volume.spacing();
  const Dims& d = volume.dims();
  auto lo = [](double c, double r, double sp) {
    return std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(c - r / sp)));
  };
  auto hi = [](double c, double r, double sp, std::int64_t n) {
    return std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(std::ceil(c + r / sp)));
  };
  const Index3 b0{lo(center[0], radius, s.sx), lo(center[1], radius, s.sy),
                  lo(center[2], radius, s.sz)};
  const Index3 b1{hi(center[0], radius, s.sx, d.nx), hi(center[1], radius, s.sy, d.ny),
                  hi(center[2], radius, s.sz, d.nz)};
  if (b1.x < b0.x || b1.y < b0.y || b1.z < b0.z) return volume;
  const Box box{b0, Dims{b1.x - b0.x + 1, b1.y - b0.y + 1, b1.z - b0.z + 1}};

  DisplacementField field(box.extent, s);
  for (std::int64_t k = 0; k < box.extent.nz; ++k) {
    for (std::int64_t j = 0; j < box.extent.ny; ++j) {
      for (std::int64_t i = 0; i < box.extent.nx; ++i) {
        const double vx = static_cast<double>(b0.x + i) - center[0];
        const double vy = static_cast<double>(b0.y + j) - center[1];
        const double vz = static_cast<double>(b0.z + k) - center[2];
        const double dist = distance_mm(static_cast<double>(b0.x + i), static_cast<double>(b0.y + j),
                                        static_cast<double>(b0.z + k), center, s);
        if (dist >= radius) continue;
        const double t = 1.0 - dist / radius;
        const double shrink = lambda * t * t;
        field(i, j, k) = Vec3f{static_cast<float>(-vx * shrink), static_cast<float>(-vy * shrink),
                               static_cast<float>(-vz * shrink)};
      }
    }
  }
  CtVolume out = volume;
  out.grid = warp_region(volume.grid, box, field, Interpolation::trilinear);
  return out;
}

BinaryMask capsule_rim(const BinaryMask& tumor, int width) {
  if (width < 0) throw Error(Errc::invalid_argument, "capsule width must be >= 0");
  if (width == 0) return BinaryMask(tumor.dims(), tumor.spacing());
  return mask_difference(dilate(tumor, width), erode(tumor, width));
}

CtVolume apply_capsule(const CtVolume& volume, const BinaryMask& tumor, int width, double delta) {
  require_same_dims(volume.dims(), tumor.dims(), "apply_capsule");
  if (width < 0) throw Error(Errc::invalid_argument, "capsule width must be >= 0");
  if (width == 0 || delta == 0.0) return volume;
  const BinaryMask rim = capsule_rim(tumor, width);
  CtVolume out = volume;
  for (std::int64_t i = 0; i < rim.size(); ++i) {
    if (rim.test(i)) out.grid[i] = static_cast<float>(out.grid[i] + delta);
  }
  return out;
}

SynthesisResult compose_tumors(const CtVolume& host, const BinaryMask& liver,
                               const BinaryMask& vessels, std::span<const TumorSpec> specs,
                               const PlacementParams& placement) {
  require_same_dims(host.dims(), liver.dims(), "compose_tumors");
  require_same_dims(host.dims(), vessels.dims(), "compose_tumors");
  if (!liver.any()) throw Error(Errc::empty_mask, "liver mask is empty");
  const Dims& dims = host.dims();
  const Spacing& spacing = host.spacing();
  const auto& hg = host.grid;

  BinaryMask forbidden = vessels;
  const ForegroundBounds lb = foreground_bounds(liver);
  std::vector<PlacedTumor> placed;
  for (std::size_t t = 0; t < specs.size(); ++t) {
    const TumorSpec& spec = specs[t];
    validate(spec);
    const BinaryMask ellipsoid = make_ellipsoid(spec.ellipsoid, spacing, spec.eccentricity_cap);
    DeformedShape deformed = deform_single_component(ellipsoid, spec.deform, spec.acceptance);
    PlacedTumor p;
    p.shape = crop_to_foreground(deformed.mask);

    PlacementParams pp = placement;
    pp.seed = derive_seed(placement.seed, SeedStream::placement, t);
    // An oversized draw has no feasible site; report it so the caller resamples.
    const Dims& fit = p.shape.dims();
    if (fit.nx > lb.hi.x - lb.lo.x + 1 || fit.ny > lb.hi.y - lb.lo.y + 1 || fit.nz > lb.hi.z - lb.lo.z + 1) {
      throw Error(Errc::placement_exhausted, "tumor shape " + to_string(fit) + " is larger than the liver");
    }
    const PlacementResult where = select_location(liver, forbidden, p.shape, pp);
    p.offset = where.offset;

    const Dims& sd = p.shape.dims();
    double cx = 0, cy = 0, cz = 0;
    for (std::int64_t z = 0; z < sd.nz; ++z) {
      for (std::int64_t y = 0; y < sd.ny; ++y) {
        for (std::int64_t x = 0; x < sd.nx; ++x) {
          if (!p.shape.test(x, y, z)) continue;
          const std::int64_t gx = x + p.offset.x, gy = y + p.offset.y, gz = z + p.offset.z;
          if (!dims.contains(gx, gy, gz)) continue;
          p.voxels.push_back(hg.index(gx, gy, gz));
          cx += static_cast<double>(gx);
          cy += static_cast<double>(gy);
          cz += static_cast<double>(gz);
        }
      }
    }
    std::sort(p.voxels.begin(), p.voxels.end());
    const auto n = static_cast<double>(p.voxels.size());
    p.center = {cx / n, cy / n, cz / n};

    TumorRecord& r = p.record;
    r.spec = spec;
    r.offset = p.offset;
    r.shape_dims = sd;
    r.center = p.center;
    r.voxels = static_cast<std::int64_t>(p.voxels.size());
    r.equivalent_radius_mm = equivalent_radius_mm(r.voxels, spacing);
    r.influence_radius_mm = spec.mass_effect_strength > 0.0
                                ? spec.influence_factor * r.equivalent_radius_mm
                                : 0.0;
    r.deform_seed_used = deformed.seed_used;
    r.deform_attempts = deformed.attempts;
    r.placement_seed = pp.seed;
    r.placement_attempts = where.attempts;

    // Later tumors keep clear of this one's capsule so components never touch.
    const BinaryMask here = voxels_to_mask(p.voxels, dims, spacing);
    forbidden = mask_union(forbidden, dilate(here, 2 * spec.capsule_width_voxels + 1));
    placed.push_back(std::move(p));
  }

  CtVolume volume = host;
  for (const auto& p : placed) {
    const TumorSpec& spec = p.record.spec;
    if (spec.mass_effect_strength == 0.0) continue;
    volume = apply_mass_effect(volume, voxels_to_mask(p.voxels, dims, spacing), p.center,
                               spec.mass_effect_strength, spec.influence_factor);
  }

  for (const auto& p : placed) {
    const TumorSpec& spec = p.record.spec;
    const VoxelGrid texture = generate_texture(p.shape.dims(), spec.texture, spacing);
    const VoxelGrid weights = blend_weights(p.shape, spec.edge_blend_sigma);
    const Dims& sd = p.shape.dims();
    for (std::int64_t z = 0; z < sd.nz; ++z) {
      for (std::int64_t y = 0; y < sd.ny; ++y) {
        for (std::int64_t x = 0; x < sd.nx; ++x) {
          if (!p.shape.test(x, y, z)) continue;
          const std::int64_t gx = x + p.offset.x, gy = y + p.offset.y, gz = z + p.offset.z;
          if (!dims.contains(gx, gy, gz)) continue;
          const double w = weights(x, y, z);
          float& v = volume.grid(gx, gy, gz);
          v = static_cast<float>(w * texture(x, y, z) + (1.0 - w) * v);
        }
      }
    }
  }

  for (const auto& p : placed) {
    const TumorSpec& spec = p.record.spec;
    volume = apply_capsule(volume, voxels_to_mask(p.voxels, dims, spacing),
                           spec.capsule_width_voxels, spec.capsule_delta_hu);
  }

  SynthesisResult result;
  result.volume = std::move(volume);
  result.label = LabelMask(dims, spacing);
  for (std::int64_t i = 0; i < liver.size(); ++i) {
    if (liver.test(i)) result.label.assign(i, LabelMask::kLiver);
  }
  for (auto& p : placed) {
    for (auto i : p.voxels) result.label.assign(i, LabelMask::kTumor);
    result.tumors.push_back(std::move(p.record));
    result.tumor_voxels.push_back(std::move(p.voxels));
  }
  return result;
}

SynthesisResult synthesize_tumor(const CtVolume& host, const BinaryMask& liver,
                                 const TumorSpec& spec, const PlacementParams& placement,
                                 const VesselParams& vessel_params) {
  const BinaryMask vessels = segment_vessels(host, liver, vessel_params);
  return compose_tumors(host, liver, vessels, std::span<const TumorSpec>(&spec, 1), placement);
}

BinaryMask influence_region(const TumorRecord& record, std::span<const std::int64_t> tumor_voxels,
                            const Dims& dims, const Spacing& spacing) {
  BinaryMask region = voxels_to_mask(tumor_voxels, dims, spacing);
  if (record.spec.capsule_width_voxels > 0) {
    region = dilate(region, record.spec.capsule_width_voxels);
  }
  const double radius = record.influence_radius_mm;
  if (radius > 0.0) {
    for (std::int64_t z = 0; z < dims.nz; ++z) {
      for (std::int64_t y = 0; y < dims.ny; ++y) {
        for (std::int64_t x = 0; x < dims.nx; ++x) {
          const double dist = distance_mm(static_cast<double>(x), static_cast<double>(y),
                                          static_cast<double>(z), record.center, spacing);
          if (dist < radius) region.set(x, y, z);
        }
      }
    }
  }
  return region;
}

}  // namespace tumorsynth
