#include "tumorsynth/components.hpp"

#include <algorithm>
#include <cmath>

namespace tumorsynth {

BinaryMask Component::to_mask(const Dims& dims, const Spacing& spacing) const {
  BinaryMask out(dims, spacing);
  for (auto i : voxels) out.set(i);
  return out;
}

std::vector<Index3> neighbor_offsets(Connectivity connectivity) {
  std::vector<Index3> out;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (manhattan == 0) continue;
        if (connectivity == Connectivity::six && manhattan != 1) continue;
        out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

std::vector<Component> connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const Dims d = mask.dims();
  const auto offsets = neighbor_offsets(connectivity);
  const auto& grid = mask.grid();

  std::vector<std::uint8_t> visited(static_cast<std::size_t>(mask.size()), 0);
  std::vector<Component> components;
  std::vector<std::int64_t> stack;

  for (std::int64_t start = 0; start < mask.size(); ++start) {
    if (!grid[start] || visited[start]) continue;
    Component comp;
    visited[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::int64_t cur = stack.back();
      stack.pop_back();
      comp.voxels.push_back(cur);
      const Index3 c = grid.coords(cur);
      for (const auto& o : offsets) {
        const std::int64_t x = c.x + o.x, y = c.y + o.y, z = c.z + o.z;
        if (!d.contains(x, y, z)) continue;
        const std::int64_t n = grid.index(x, y, z);
        if (grid[n] && !visited[n]) {
          visited[n] = 1;
          stack.push_back(n);
        }
      }
    }
    std::sort(comp.voxels.begin(), comp.voxels.end());
    components.push_back(std::move(comp));
  }
  return components;
}

BinaryMask remove_small_components(const BinaryMask& mask, std::int64_t min_voxels,
                                   Connectivity connectivity) {
  if (min_voxels <= 1) return mask;
  BinaryMask out(mask.dims(), mask.spacing());
  for (const auto& comp : connected_components(mask, connectivity)) {
    if (comp.count() < min_voxels) continue;
    for (auto i : comp.voxels) out.set(i);
  }
  return out;
}

std::int64_t count_components(const BinaryMask& mask, Connectivity connectivity) {
  return static_cast<std::int64_t>(connected_components(mask, connectivity).size());
}

}  // namespace tumorsynth

namespace tumorsynth {

double equivalent_radius_mm(std::int64_t voxels, const Spacing& spacing) {
  constexpr double kPi = 3.14159265358979323846;
  const double volume = static_cast<double>(voxels) * spacing.voxel_volume();
  return std::cbrt(3.0 * volume / (4.0 * kPi));
}

ForegroundBounds foreground_bounds(const BinaryMask& mask) {
  ForegroundBounds b;
  const Dims& d = mask.dims();
  b.lo = {d.nx, d.ny, d.nz};
  b.hi = {-1, -1, -1};
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (!mask.test(x, y, z)) continue;
        b.lo = {std::min(b.lo.x, x), std::min(b.lo.y, y), std::min(b.lo.z, z)};
        b.hi = {std::max(b.hi.x, x), std::max(b.hi.y, y), std::max(b.hi.z, z)};
        b.empty = false;
      }
    }
  }
  return b;
}

BinaryMask crop_to_foreground(const BinaryMask& mask, Index3* origin) {
  const ForegroundBounds b = foreground_bounds(mask);
  if (b.empty) throw Error(Errc::empty_mask, "cannot crop an empty mask");
  const Dims extent{b.hi.x - b.lo.x + 1, b.hi.y - b.lo.y + 1, b.hi.z - b.lo.z + 1};
  BinaryMask out(extent, mask.spacing());
  for (std::int64_t z = 0; z < extent.nz; ++z) {
    for (std::int64_t y = 0; y < extent.ny; ++y) {
      for (std::int64_t x = 0; x < extent.nx; ++x) {
        if (mask.test(b.lo.x + x, b.lo.y + y, b.lo.z + z)) out.set(x, y, z);
      }
    }
  }
  if (origin) *origin = b.lo;
  return out;
}

}  // namespace tumorsynth
