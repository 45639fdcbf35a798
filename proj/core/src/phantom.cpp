#include "tumorsynth/phantom.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "tumorsynth/nifti.hpp"
#include "tumorsynth/random.hpp"

namespace tumorsynth {
namespace {

struct Tube {
  std::array<double, 3> p;  // point on the axis, mm
  std::array<double, 3> d;  // unit direction
};

double distance_to_line(const Tube& t, double x, double y, double z) {
  const double vx = x - t.p[0], vy = y - t.p[1], vz = z - t.p[2];
  const double along = vx * t.d[0] + vy * t.d[1] + vz * t.d[2];
  const double px = vx - along * t.d[0], py = vy - along * t.d[1], pz = vz - along * t.d[2];
  return std::sqrt(px * px + py * py + pz * pz);
}

}  // namespace

Phantom make_phantom(const PhantomSpec& spec) {
  for (double a : spec.liver_semi_axes_mm) {
    if (!(a > 0.0)) throw Error(Errc::invalid_argument, "phantom: liver semi-axes must be positive");
  }
  if (spec.vessel_count < 0 || spec.vessel_radius_mm < 0.0 || spec.liver_noise_sd < 0.0) {
    throw Error(Errc::invalid_argument, "phantom: negative vessel or noise parameter");
  }
  const Dims dims = spec.dims;
  const Spacing sp = spec.spacing;
  Rng rng(derive_seed(spec.seed, SeedStream::phantom));

  // Volume centre in mm, measured from voxel (0,0,0).
  const double cx = 0.5 * static_cast<double>(dims.nx - 1) * sp.sx;
  const double cy = 0.5 * static_cast<double>(dims.ny - 1) * sp.sy;
  const double cz = 0.5 * static_cast<double>(dims.nz - 1) * sp.sz;
  const auto& la = spec.liver_semi_axes_mm;
  const double body_a = 0.48 * static_cast<double>(dims.nx) * sp.sx;
  const double body_b = 0.48 * static_cast<double>(dims.ny) * sp.sy;

  std::vector<Tube> tubes;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int v = 0; v < spec.vessel_count; ++v) {
    Tube t;
    t.p = {cx + 0.5 * la[0] * unit(rng), cy + 0.5 * la[1] * unit(rng), cz + 0.5 * la[2] * unit(rng)};
    double n = 0.0;
    do {
      t.d = {unit(rng), unit(rng), unit(rng)};
      n = std::sqrt(t.d[0] * t.d[0] + t.d[1] * t.d[1] + t.d[2] * t.d[2]);
    } while (n < 1e-3 || n > 1.0);
    for (auto& c : t.d) c /= n;
    tubes.push_back(t);
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  Phantom out;
  out.volume.grid = VoxelGrid(dims, sp, static_cast<float>(spec.air_hu));
  out.volume.affine = affine_from_spacing(sp);
  out.volume.storage = StorageType::int16;
  out.label = LabelMask(dims, sp);
  out.liver = BinaryMask(dims, sp);
  out.vessels = BinaryMask(dims, sp);
  for (std::int64_t z = 0; z < dims.nz; ++z) {
    for (std::int64_t y = 0; y < dims.ny; ++y) {
      for (std::int64_t x = 0; x < dims.nx; ++x) {
        const double px = static_cast<double>(x) * sp.sx;
        const double py = static_cast<double>(y) * sp.sy;
        const double pz = static_cast<double>(z) * sp.sz;
        const double dx = px - cx, dy = py - cy, dz = pz - cz;
        const std::int64_t i = out.volume.grid.index(x, y, z);
        // Noise is drawn for every voxel so the stream does not depend on geometry.
        const double n = noise(rng);
        double hu = spec.air_hu;
        if ((dx / body_a) * (dx / body_a) + (dy / body_b) * (dy / body_b) <= 1.0) hu = spec.body_hu;
        const double r = (dx / la[0]) * (dx / la[0]) + (dy / la[1]) * (dy / la[1]) + (dz / la[2]) * (dz / la[2]);
        if (r <= 1.0) {
          out.liver.set(i);
          out.label.assign(i, LabelMask::kLiver);
          hu = spec.liver_hu + spec.liver_noise_sd * n;
          for (const auto& t : tubes) {
            if (distance_to_line(t, px, py, pz) <= spec.vessel_radius_mm) {
              out.vessels.set(i);
              hu = spec.vessel_hu + spec.liver_noise_sd * n;
              break;
            }
          }
        }
        out.volume.grid[i] = static_cast<float>(std::round(hu));
      }
    }
  }
  return out;
}

}  // namespace tumorsynth
