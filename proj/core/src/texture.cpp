#include "tumorsynth/texture.hpp"

#include "tumorsynth/filters.hpp"
#include "tumorsynth/random.hpp"

namespace tumorsynth {

VoxelGrid generate_texture(const Dims& dims, const TextureSpec& spec, const Spacing& spacing) {
  if (spec.sigma_g < 0.0) throw Error(Errc::invalid_argument, "sigma_g must be >= 0");
  if (spec.coarse_factor < 1) throw Error(Errc::invalid_argument, "coarse_factor must be >= 1");
  if (spec.blur_sigma < 0.0) throw Error(Errc::invalid_argument, "blur_sigma must be >= 0");
  if (spec.sigma_g == 0.0) return VoxelGrid(dims, spacing, static_cast<float>(spec.mu));

  const int f = spec.coarse_factor;
  const Dims coarse{(dims.nx - 1) / f + 1, (dims.ny - 1) / f + 1, (dims.nz - 1) / f + 1};
  const Spacing coarse_spacing{spacing.sx * f, spacing.sy * f, spacing.sz * f};
  VoxelGrid noise(coarse, coarse_spacing, 0.0f);
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.sigma_g);
  for (auto& v : noise.values()) v = static_cast<float>(normal(rng));

  VoxelGrid fine = upsample_cubic(noise, dims, f);
  fine = gaussian_blur(fine, spec.blur_sigma);
  VoxelGrid out(dims, spacing, 0.0f);
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(spec.mu + fine[i]);
  }
  return out;
}

}  // namespace tumorsynth
