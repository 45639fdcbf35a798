#include "tumorsynth/placement.hpp"

#include <cmath>
#include <random>

#include "tumorsynth/components.hpp"
#include "tumorsynth/morphology.hpp"
#include "tumorsynth/random.hpp"

namespace tumorsynth {
namespace {

struct ShapeVoxels {
  std::vector<Index3> voxels;
};

ShapeVoxels shape_voxels(const BinaryMask& shape) {
  ShapeVoxels s;
  const Dims& d = shape.dims();
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (shape.test(x, y, z)) s.voxels.push_back({x, y, z});
      }
    }
  }
  return s;
}

// Early-exits as soon as acceptance becomes impossible.
bool accept(const BinaryMask& liver, const BinaryMask& blocked, const ShapeVoxels& shape,
            const Index3& offset, double containment) {
  const Dims& d = liver.dims();
  const auto total = static_cast<std::int64_t>(shape.voxels.size());
  const auto allowed_outside =
      static_cast<std::int64_t>(std::floor((1.0 - containment) * static_cast<double>(total) + 1e-9));
  std::int64_t outside = 0;
  for (const auto& v : shape.voxels) {
    const std::int64_t x = v.x + offset.x, y = v.y + offset.y, z = v.z + offset.z;
    if (!d.contains(x, y, z)) {
      if (++outside > allowed_outside) return false;
      continue;
    }
    if (blocked.test(x, y, z)) return false;
    if (!liver.test(x, y, z) && ++outside > allowed_outside) return false;
  }
  return true;
}

}  // namespace

PlacementCheck check_placement(const BinaryMask& liver, const BinaryMask& blocked,
                               const BinaryMask& shape, const Index3& offset) {
  require_same_dims(liver.dims(), blocked.dims(), "check_placement");
  const Dims& d = liver.dims();
  std::int64_t inside = 0, total = 0;
  PlacementCheck out;
  for (const auto& v : shape_voxels(shape).voxels) {
    ++total;
    const std::int64_t x = v.x + offset.x, y = v.y + offset.y, z = v.z + offset.z;
    if (!d.contains(x, y, z)) continue;
    if (liver.test(x, y, z)) ++inside;
    if (blocked.test(x, y, z)) out.collides = true;
  }
  out.liver_fraction = total ? static_cast<double>(inside) / static_cast<double>(total) : 0.0;
  return out;
}

PlacementResult select_location(const BinaryMask& liver, const BinaryMask& forbidden,
                                 const BinaryMask& shape, const PlacementParams& params) {
  require_same_dims(liver.dims(), forbidden.dims(), "select_location");
  if (params.max_attempts < 1) throw Error(Errc::invalid_argument, "max_attempts must be >= 1");
  if (!(params.containment > 0.0 && params.containment <= 1.0)) {
    throw Error(Errc::invalid_argument, "containment must lie in (0, 1]");
  }
  if (params.vessel_safety_margin_voxels < 0) {
    throw Error(Errc::invalid_argument, "vessel_safety_margin_voxels must be >= 0");
  }
  const std::vector<std::int64_t> candidates = liver.foreground();
  if (candidates.empty()) throw Error(Errc::empty_mask, "liver mask is empty");
  const ShapeVoxels voxels = shape_voxels(shape);
  if (voxels.voxels.empty()) throw Error(Errc::empty_mask, "tumor shape is empty");

  const ForegroundBounds lb = foreground_bounds(liver);
  const Dims& sd = shape.dims();
  if (sd.nx > lb.hi.x - lb.lo.x + 1 || sd.ny > lb.hi.y - lb.lo.y + 1 ||
      sd.nz > lb.hi.z - lb.lo.z + 1) {
    throw Error(Errc::invalid_argument, "tumor shape " + to_string(sd) +
                                            " does not fit the liver bounding box");
  }

  const BinaryMask blocked = params.vessel_safety_margin_voxels > 0 && forbidden.any()
                                 ? dilate(forbidden, params.vessel_safety_margin_voxels)
                                 : forbidden;

  Rng rng(derive_seed(params.seed, SeedStream::placement));
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  const Index3 half{sd.nx / 2, sd.ny / 2, sd.nz / 2};
  for (int attempt = 1; attempt <= params.max_attempts; ++attempt) {
    const Index3 c = liver.grid().coords(candidates[pick(rng)]);
    const Index3 offset{c.x - half.x, c.y - half.y, c.z - half.z};
    if (accept(liver, blocked, voxels, offset, params.containment)) return {offset, attempt};
  }
  throw Error(Errc::placement_exhausted,
              "no valid tumor location after " + std::to_string(params.max_attempts) + " attempts");
}

}  // namespace tumorsynth
