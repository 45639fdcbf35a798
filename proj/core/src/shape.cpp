#include "tumorsynth/shape.hpp"

#include <algorithm>
#include <cmath>

#include "tumorsynth/components.hpp"
#include "tumorsynth/filters.hpp"
#include "tumorsynth/random.hpp"

namespace tumorsynth {

BinaryMask make_ellipsoid(const EllipsoidSpec& spec, const Spacing& spacing,
                          double eccentricity_cap) {
  if (!(spec.a > 0.0) || !(spec.b > 0.0) || !(spec.c > 0.0)) {
    throw Error(Errc::invalid_argument, "ellipsoid semi-axes must be positive");
  }
  const double hi = std::max({spec.a, spec.b, spec.c});
  const double lo = std::min({spec.a, spec.b, spec.c});
  if (hi / lo > eccentricity_cap * (1.0 + 1e-12)) {
    throw Error(Errc::invalid_argument, "ellipsoid eccentricity exceeds cap");
  }
  if (spec.a < spacing.sx || spec.b < spacing.sy || spec.c < spacing.sz) {
    throw Error(Errc::sub_resolution, "ellipsoid semi-axis smaller than one voxel");
  }

  const auto hx = static_cast<std::int64_t>(std::floor(spec.a / spacing.sx));
  const auto hy = static_cast<std::int64_t>(std::floor(spec.b / spacing.sy));
  const auto hz = static_cast<std::int64_t>(std::floor(spec.c / spacing.sz));
  BinaryMask out(Dims{2 * hx + 1, 2 * hy + 1, 2 * hz + 1}, spacing);
  for (std::int64_t k = -hz; k <= hz; ++k) {
    const double z = k * spacing.sz / spec.c;
    for (std::int64_t j = -hy; j <= hy; ++j) {
      const double y = j * spacing.sy / spec.b;
      for (std::int64_t i = -hx; i <= hx; ++i) {
        const double x = i * spacing.sx / spec.a;
        if (x * x + y * y + z * z <= 1.0) out.set(i + hx, j + hy, k + hz);
      }
    }
  }
  return out;
}

int deform_padding(double sigma_d) {
  return sigma_d > 0.0 ? static_cast<int>(std::ceil(3.0 * sigma_d)) : 0;
}

DisplacementField make_elastic_field(const Dims& dims, const DeformSpec& spec) {
  if (spec.sigma_d < 0.0) throw Error(Errc::invalid_argument, "sigma_d must be >= 0");
  if (spec.control_spacing < 2) throw Error(Errc::invalid_argument, "control_spacing must be >= 2");
  const int cs = spec.control_spacing;
  const Dims coarse{(dims.nx - 1) / cs + 2, (dims.ny - 1) / cs + 2, (dims.nz - 1) / cs + 2};

  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.sigma_d);
  std::array<VoxelGrid, 3> comp{VoxelGrid(coarse, Spacing{}), VoxelGrid(coarse, Spacing{}),
                                VoxelGrid(coarse, Spacing{})};
  for (std::int64_t i = 0; i < coarse.count(); ++i) {
    for (auto& g : comp) g[i] = spec.sigma_d > 0.0 ? static_cast<float>(normal(rng)) : 0.0f;
  }

  DisplacementField field(dims, Spacing{});
  const double coarse_sigma = spec.smooth_sigma / cs;
  for (int axis = 0; axis < 3; ++axis) {
    const VoxelGrid smooth = gaussian_blur(comp[axis], coarse_sigma);
    const VoxelGrid fine = upsample_linear(smooth, dims, cs);
    for (std::int64_t i = 0; i < dims.count(); ++i) {
      (axis == 0 ? field[i].x : axis == 1 ? field[i].y : field[i].z) = fine[i];
    }
  }
  return field;
}

DisplacementField exponentiate_field(const DisplacementField& velocity) {
  float peak = 0.0f;
  for (const auto& v : velocity.values()) peak = std::max(peak, std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z));
  int steps = 0;
  while (peak / static_cast<float>(1 << steps) > 0.5f && steps < 16) ++steps;

  DisplacementField u = velocity;
  const float scale = 1.0f / static_cast<float>(1 << steps);
  for (auto& v : u.values()) v = Vec3f{v.x * scale, v.y * scale, v.z * scale};
  const Dims& d = u.dims();
  for (int s = 0; s < steps; ++s) {
    // u <- u + u o (id + u)
    DisplacementField next(d, u.spacing());
    for (std::int64_t z = 0; z < d.nz; ++z) {
      for (std::int64_t y = 0; y < d.ny; ++y) {
        for (std::int64_t x = 0; x < d.nx; ++x) {
          const Vec3f p = u(x, y, z);
          const Vec3f q = sample_vector(u, static_cast<double>(x) + p.x, static_cast<double>(y) + p.y,
                                        static_cast<double>(z) + p.z);
          next(x, y, z) = Vec3f{p.x + q.x, p.y + q.y, p.z + q.z};
        }
      }
    }
    u = std::move(next);
  }
  return u;
}

BinaryMask elastic_deform(const BinaryMask& mask, const DeformSpec& spec) {
  if (!mask.any()) throw Error(Errc::empty_mask, "cannot deform an empty mask");
  if (spec.sigma_d == 0.0) return mask;

  const int pad = deform_padding(spec.sigma_d);
  const Dims& d = mask.dims();
  const Dims padded{d.nx + 2 * pad, d.ny + 2 * pad, d.nz + 2 * pad};
  VoxelGrid values(padded, mask.spacing(), 0.0f);
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (mask.test(x, y, z)) values(x + pad, y + pad, z + pad) = 1.0f;
      }
    }
  }

  const DisplacementField field = exponentiate_field(make_elastic_field(padded, spec));
  VoxelGrid warped = warp_by_displacement(values, field, Interpolation::trilinear);

  // Undo the net compression or expansion with an isotropic rescale about
  // the centroid, so only the shape changes.
  double cx = 0.0, cy = 0.0, cz = 0.0;
  std::int64_t n = 0;
  for (std::int64_t i = 0; i < warped.size(); ++i) {
    if (warped[i] >= 0.5f) {
      const Index3 c = warped.coords(i);
      cx += static_cast<double>(c.x);
      cy += static_cast<double>(c.y);
      cz += static_cast<double>(c.z);
      ++n;
    }
  }
  if (n > 0 && n != mask.count()) {
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    cz /= static_cast<double>(n);
    const double inv = 1.0 / std::cbrt(static_cast<double>(mask.count()) / static_cast<double>(n));
    DisplacementField rescale(padded, mask.spacing());
    for (std::int64_t i = 0; i < rescale.size(); ++i) {
      const Index3 c = rescale.coords(i);
      const auto along = [inv](double p, double centre) { return static_cast<float>((p - centre) * (inv - 1.0)); };
      rescale[i] = Vec3f{along(static_cast<double>(c.x), cx), along(static_cast<double>(c.y), cy),
                         along(static_cast<double>(c.z), cz)};
    }
    warped = warp_by_displacement(warped, rescale, Interpolation::trilinear);
  }

  BinaryMask out(padded, mask.spacing());
  for (std::int64_t i = 0; i < warped.size(); ++i) {
    if (warped[i] >= 0.5f) out.set(i);
  }
  return out;
}

DeformedShape deform_single_component(const BinaryMask& mask, const DeformSpec& spec,
                                      const ShapeAcceptance& acceptance) {
  for (int attempt = 0; attempt < acceptance.max_attempts; ++attempt) {
    DeformSpec s = spec;
    s.seed = spec.seed + static_cast<std::uint64_t>(attempt);
    BinaryMask deformed = elastic_deform(mask, s);
    const auto components = connected_components(deformed, Connectivity::twentysix);
    if (components.size() != 1) continue;
    const double r = equivalent_radius_mm(components.front().count(), mask.spacing());
    if (acceptance.min_radius_mm && r < *acceptance.min_radius_mm) continue;
    if (acceptance.max_radius_mm &&
        (acceptance.max_inclusive ? r > *acceptance.max_radius_mm : r >= *acceptance.max_radius_mm)) {
      continue;
    }
    return {std::move(deformed), s.seed, attempt + 1};
  }
  throw Error(Errc::shape_rejected, "no acceptable deformed shape after " +
                                        std::to_string(acceptance.max_attempts) + " attempts");
}

}  // namespace tumorsynth
