#include "tumorsynth/filters.hpp"

#include "tumorsynth/warp.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace tumorsynth {
namespace {

// Blur one axis in place: axis 0 = x, 1 = y, 2 = z.
void blur_axis(std::vector<float>& data, const Dims& d, int axis, const std::vector<double>& taps) {
  const auto radius = static_cast<std::int64_t>(taps.size() / 2);
  const std::int64_t n = axis == 0 ? d.nx : (axis == 1 ? d.ny : d.nz);
  const std::int64_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);
  const std::int64_t lines = d.count() / n;
  std::vector<double> line(static_cast<std::size_t>(n));

  for (std::int64_t l = 0; l < lines; ++l) {
    // Base index of line l for this axis.
    std::int64_t base = 0;
    if (axis == 0) {
      base = l * d.nx;
    } else if (axis == 1) {
      const std::int64_t x = l % d.nx, z = l / d.nx;
      base = x + z * d.nx * d.ny;
    } else {
      base = l;
    }
    for (std::int64_t i = 0; i < n; ++i) line[i] = data[base + i * stride];
    for (std::int64_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::int64_t t = -radius; t <= radius; ++t) {
        const std::int64_t s = std::clamp<std::int64_t>(i + t, 0, n - 1);
        acc += taps[t + radius] * line[s];
      }
      data[base + i * stride] = static_cast<float>(acc);
    }
  }
}

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  const double t2 = t * t, t3 = t2 * t;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += taps[i + radius];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

VoxelGrid gaussian_blur(const VoxelGrid& grid, double sigma) {
  if (!(sigma > 0.0)) return grid;
  const auto taps = gaussian_kernel(sigma);
  std::vector<float> data = grid.storage();
  for (int axis = 0; axis < 3; ++axis) blur_axis(data, grid.dims(), axis, taps);
  return VoxelGrid(grid.dims(), grid.spacing(), std::move(data));
}

VoxelGrid upsample_cubic(const VoxelGrid& coarse, const Dims& fine, int factor) {
  if (factor < 1) throw Error(Errc::invalid_argument, "upsampling factor must be >= 1");
  const Dims& c = coarse.dims();
  const Spacing s{coarse.spacing().sx / factor, coarse.spacing().sy / factor,
                  coarse.spacing().sz / factor};

  // Separable: x, then y, then z, each producing an intermediate grid.
  auto upsample_axis = [factor](const std::vector<double>& src, const Dims& sd, int axis,
                                std::int64_t out_n, Dims& od) {
    od = sd;
    (axis == 0 ? od.nx : axis == 1 ? od.ny : od.nz) = out_n;
    std::vector<double> dst(static_cast<std::size_t>(od.count()));
    const std::int64_t in_n = axis == 0 ? sd.nx : axis == 1 ? sd.ny : sd.nz;
    for (std::int64_t z = 0; z < od.nz; ++z) {
      for (std::int64_t y = 0; y < od.ny; ++y) {
        for (std::int64_t x = 0; x < od.nx; ++x) {
          const std::int64_t i = axis == 0 ? x : axis == 1 ? y : z;
          const std::int64_t k = i / factor;
          const double t = static_cast<double>(i - k * factor) / factor;
          std::array<double, 4> p{};
          for (int m = 0; m < 4; ++m) {
            const std::int64_t q = std::clamp<std::int64_t>(k - 1 + m, 0, in_n - 1);
            const std::int64_t sx = axis == 0 ? q : x, sy = axis == 1 ? q : y,
                               sz = axis == 2 ? q : z;
            p[m] = src[sx + sd.nx * (sy + sd.ny * sz)];
          }
          dst[x + od.nx * (y + od.ny * z)] =
              t == 0.0 ? p[1] : catmull_rom(p[0], p[1], p[2], p[3], t);
        }
      }
    }
    return dst;
  };

  std::vector<double> cur(coarse.storage().begin(), coarse.storage().end());
  Dims cd = c, nd{};
  cur = upsample_axis(cur, cd, 0, fine.nx, nd);
  cd = nd;
  cur = upsample_axis(cur, cd, 1, fine.ny, nd);
  cd = nd;
  cur = upsample_axis(cur, cd, 2, fine.nz, nd);
  std::vector<float> out(cur.begin(), cur.end());
  return VoxelGrid(fine, s, std::move(out));
}

VoxelGrid upsample_linear(const VoxelGrid& coarse, const Dims& fine, int factor) {
  if (factor < 1) throw Error(Errc::invalid_argument, "upsampling factor must be >= 1");
  const Spacing s{coarse.spacing().sx / factor, coarse.spacing().sy / factor,
                  coarse.spacing().sz / factor};
  VoxelGrid out(fine, s, 0.0f);
  const double inv = 1.0 / factor;
  for (std::int64_t z = 0; z < fine.nz; ++z) {
    for (std::int64_t y = 0; y < fine.ny; ++y) {
      for (std::int64_t x = 0; x < fine.nx; ++x) {
        out(x, y, z) = sample(coarse, x * inv, y * inv, z * inv, Interpolation::trilinear);
      }
    }
  }
  return out;
}

}  // namespace tumorsynth
