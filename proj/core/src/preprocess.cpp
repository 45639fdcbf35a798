#include "tumorsynth/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace tumorsynth {

VoxelGrid preprocess(const CtVolume& volume, const PreprocessParams& params) {
  if (!(params.clip_min < params.clip_max)) {
    throw Error(Errc::invalid_argument, "clip_min must be below clip_max");
  }
  VoxelGrid out = volume.grid;
  for (auto& v : out.values()) v = std::clamp(v, params.clip_min, params.clip_max);
  if (!params.normalize) return out;

  double sum = 0.0;
  for (auto v : out.values()) sum += v;
  const double mean = sum / static_cast<double>(out.size());
  double ss = 0.0;
  for (auto v : out.values()) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(out.size()));
  if (!(sd > 0.0)) {
    throw Error(Errc::zero_variance, "cannot normalise a constant volume");
  }
  for (auto& v : out.values()) v = static_cast<float>((v - mean) / sd);
  return out;
}

}  // namespace tumorsynth
