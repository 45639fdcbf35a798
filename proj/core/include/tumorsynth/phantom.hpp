#pragma once

#include <array>
#include <cstdint>

#include "tumorsynth/grid.hpp"

namespace tumorsynth {

/// Synthetic abdomen: air outside an elliptic body cylinder, an ellipsoidal
/// liver centred in the volume, and straight vessel tubes through the liver.
/// HU values are integral so the in-memory volume matches its int16 file.
struct PhantomSpec {
  Dims dims{96, 96, 80};
  Spacing spacing{2.0, 2.0, 2.0};
  std::array<double, 3> liver_semi_axes_mm{70.0, 60.0, 50.0};
  double liver_hu = 90.0;
  double liver_noise_sd = 8.0;
  double body_hu = 40.0;
  double air_hu = -1000.0;
  int vessel_count = 3;
  double vessel_radius_mm = 3.0;
  double vessel_hu = 200.0;
  std::uint64_t seed = 0;
};

struct Phantom {
  CtVolume volume;
  /// Background / liver only; phantoms are tumor-free.
  LabelMask label;
  BinaryMask liver;
  /// Tube voxels inside the liver.
  BinaryMask vessels;
};

Phantom make_phantom(const PhantomSpec& spec);

}  // namespace tumorsynth
