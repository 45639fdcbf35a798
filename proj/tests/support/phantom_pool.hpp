#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tumorsynth/dataset.hpp"
#include "tumorsynth/nifti.hpp"
#include "tumorsynth/phantom.hpp"
#include "tumorsynth/random.hpp"

// Writes `count` phantoms under dir/images and dir/labels and returns the pool.
inline std::vector<tumorsynth::PoolSource> write_phantom_pool(const std::filesystem::path& dir, int count,
                                                              tumorsynth::PhantomSpec spec,
                                                              std::uint64_t seed = 0) {
  using namespace tumorsynth;
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "labels");
  std::vector<PoolSource> pool;
  for (int i = 0; i < count; ++i) {
    spec.seed = derive_seed(seed, SeedStream::phantom, static_cast<std::uint64_t>(i));
    const Phantom p = make_phantom(spec);
    const std::string id = "p" + std::to_string(100 + i);
    const auto image = dir / "images" / (id + ".nii.gz");
    const auto label = dir / "labels" / (id + ".nii.gz");
    write_volume(image, p.volume);
    write_mask(label, p.label, p.volume.affine);
    pool.push_back({id, image, label});
  }
  return pool;
}

// 1 mm phantom small enough for quick tests, large enough for any size class.
inline tumorsynth::PhantomSpec test_phantom_spec(int edge = 64, double liver_mm = 24.0) {
  tumorsynth::PhantomSpec s;
  s.dims = {edge, edge, edge};
  s.spacing = {1.0, 1.0, 1.0};
  s.liver_semi_axes_mm = {liver_mm, 0.9 * liver_mm, 0.8 * liver_mm};
  s.vessel_count = 2;
  s.vessel_radius_mm = 1.5;
  return s;
}
