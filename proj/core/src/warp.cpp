#include "tumorsynth/warp.hpp"

#include <algorithm>
#include <cmath>

namespace tumorsynth {
namespace {

std::int64_t clamp_index(std::int64_t i, std::int64_t n) {
  return i < 0 ? 0 : (i >= n ? n - 1 : i);
}

}  // namespace

float sample(const VoxelGrid& volume, double x, double y, double z, Interpolation interpolation) {
  const Dims& d = volume.dims();
  if (interpolation == Interpolation::nearest) {
    return volume(clamp_index(std::llround(x), d.nx), clamp_index(std::llround(y), d.ny),
                  clamp_index(std::llround(z), d.nz));
  }
  // Clamp the coordinate first so edge voxels are reproduced exactly.
  x = std::clamp(x, 0.0, static_cast<double>(d.nx - 1));
  y = std::clamp(y, 0.0, static_cast<double>(d.ny - 1));
  z = std::clamp(z, 0.0, static_cast<double>(d.nz - 1));
  const double fx0 = std::floor(x), fy0 = std::floor(y), fz0 = std::floor(z);
  const double tx = x - fx0, ty = y - fy0, tz = z - fz0;
  const auto x0 = static_cast<std::int64_t>(fx0), y0 = static_cast<std::int64_t>(fy0),
             z0 = static_cast<std::int64_t>(fz0);
  const std::int64_t x1 = clamp_index(x0 + 1, d.nx), y1 = clamp_index(y0 + 1, d.ny),
                     z1 = clamp_index(z0 + 1, d.nz);
  auto v = [&](std::int64_t xi, std::int64_t yi, std::int64_t zi) {
    return static_cast<double>(volume(xi, yi, zi));
  };
  const double c00 = std::lerp(v(x0, y0, z0), v(x1, y0, z0), tx);
  const double c10 = std::lerp(v(x0, y1, z0), v(x1, y1, z0), tx);
  const double c01 = std::lerp(v(x0, y0, z1), v(x1, y0, z1), tx);
  const double c11 = std::lerp(v(x0, y1, z1), v(x1, y1, z1), tx);
  const double c0 = std::lerp(c00, c10, ty);
  const double c1 = std::lerp(c01, c11, ty);
  return static_cast<float>(std::lerp(c0, c1, tz));
}

Vec3f sample_vector(const DisplacementField& field, double x, double y, double z) {
  const Dims& d = field.dims();
  x = std::clamp(x, 0.0, static_cast<double>(d.nx - 1));
  y = std::clamp(y, 0.0, static_cast<double>(d.ny - 1));
  z = std::clamp(z, 0.0, static_cast<double>(d.nz - 1));
  const double fx0 = std::floor(x), fy0 = std::floor(y), fz0 = std::floor(z);
  const double tx = x - fx0, ty = y - fy0, tz = z - fz0;
  const auto x0 = static_cast<std::int64_t>(fx0), y0 = static_cast<std::int64_t>(fy0),
             z0 = static_cast<std::int64_t>(fz0);
  const std::int64_t xs[2] = {x0, clamp_index(x0 + 1, d.nx)};
  const std::int64_t ys[2] = {y0, clamp_index(y0 + 1, d.ny)};
  const std::int64_t zs[2] = {z0, clamp_index(z0 + 1, d.nz)};
  const double wx[2] = {1.0 - tx, tx}, wy[2] = {1.0 - ty, ty}, wz[2] = {1.0 - tz, tz};
  double ax = 0.0, ay = 0.0, az = 0.0;
  for (int k = 0; k < 2; ++k) {
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 2; ++i) {
        const double w = wx[i] * wy[j] * wz[k];
        const Vec3f& v = field(xs[i], ys[j], zs[k]);
        ax += w * v.x;
        ay += w * v.y;
        az += w * v.z;
      }
    }
  }
  return Vec3f{static_cast<float>(ax), static_cast<float>(ay), static_cast<float>(az)};
}

VoxelGrid warp_by_displacement(const VoxelGrid& volume, const DisplacementField& field,
                               Interpolation interpolation) {
  require_same_dims(volume.dims(), field.dims(), "warp_by_displacement");
  return warp_region(volume, Box{{0, 0, 0}, volume.dims()}, field, interpolation);
}

VoxelGrid warp_region(const VoxelGrid& volume, const Box& box, const DisplacementField& field,
                      Interpolation interpolation) {
  require_same_dims(box.extent, field.dims(), "warp_region");
  const Dims& d = volume.dims();
  if (box.origin.x < 0 || box.origin.y < 0 || box.origin.z < 0 ||
      box.origin.x + box.extent.nx > d.nx || box.origin.y + box.extent.ny > d.ny ||
      box.origin.z + box.extent.nz > d.nz) {
    throw Error(Errc::invalid_argument, "warp box exceeds volume " + to_string(d));
  }
  VoxelGrid out = volume;
  for (std::int64_t k = 0; k < box.extent.nz; ++k) {
    for (std::int64_t j = 0; j < box.extent.ny; ++j) {
      for (std::int64_t i = 0; i < box.extent.nx; ++i) {
        const Vec3f& u = field(i, j, k);
        const std::int64_t x = box.origin.x + i, y = box.origin.y + j, z = box.origin.z + k;
        out(x, y, z) = sample(volume, static_cast<double>(x) + u.x, static_cast<double>(y) + u.y,
                              static_cast<double>(z) + u.z, interpolation);
      }
    }
  }
  return out;
}

}  // namespace tumorsynth
