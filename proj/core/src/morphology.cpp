#include "tumorsynth/morphology.hpp"

#include <string>

namespace tumorsynth {
namespace {

void check_radius(const BinaryMask& mask, int radius) {
  if (radius < 1) {
    throw Error(Errc::invalid_argument, "morphology radius must be >= 1");
  }
  if (2.0 * radius >= static_cast<double>(mask.dims().min_extent())) {
    throw Error(Errc::invalid_argument, "structuring element radius " + std::to_string(radius) +
                                            " exceeds grid " + to_string(mask.dims()));
  }
}

}  // namespace

std::vector<Index3> ball_offsets(int radius) {
  std::vector<Index3> out;
  const std::int64_t r2 = static_cast<std::int64_t>(radius) * radius;
  for (int z = -radius; z <= radius; ++z) {
    for (int y = -radius; y <= radius; ++y) {
      for (int x = -radius; x <= radius; ++x) {
        if (x * x + y * y + z * z <= r2) out.push_back({x, y, z});
      }
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  check_radius(mask, radius);
  const Dims d = mask.dims();
  const auto ball = ball_offsets(radius);
  const auto& grid = mask.grid();
  BinaryMask out = mask;
  for (std::int64_t i = 0; i < mask.size(); ++i) {
    if (!grid[i]) continue;
    const Index3 c = grid.coords(i);
    for (const auto& o : ball) {
      const std::int64_t x = c.x + o.x, y = c.y + o.y, z = c.z + o.z;
      if (d.contains(x, y, z)) out.set(x, y, z);
    }
  }
  return out;
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  check_radius(mask, radius);
  const Dims d = mask.dims();
  const auto ball = ball_offsets(radius);
  const auto& grid = mask.grid();
  BinaryMask out(d, mask.spacing());
  for (std::int64_t i = 0; i < mask.size(); ++i) {
    if (!grid[i]) continue;
    const Index3 c = grid.coords(i);
    bool keep = true;
    for (const auto& o : ball) {
      const std::int64_t x = c.x + o.x, y = c.y + o.y, z = c.z + o.z;
      if (d.contains(x, y, z) && !grid(x, y, z)) {
        keep = false;
        break;
      }
    }
    if (keep) out.set(i);
  }
  return out;
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a.dims(), b.dims(), "mask_union");
  BinaryMask out = a;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    if (b.test(i)) out.set(i);
  }
  return out;
}

BinaryMask mask_difference(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a.dims(), b.dims(), "mask_difference");
  BinaryMask out = a;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    if (b.test(i)) out.set(i, false);
  }
  return out;
}

}  // namespace tumorsynth
