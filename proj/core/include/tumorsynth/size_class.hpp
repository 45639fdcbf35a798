#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tumorsynth {

/// Equivalent-radius bin in millimetres: [lo_mm, hi_mm), or [lo_mm, hi_mm]
/// when closed_upper is set.
struct SizeClass {
  std::string name;
  double lo_mm = 0.0;
  double hi_mm = 0.0;
  /// Largest allowed ratio between semi-axes when sampling.
  double eccentricity_cap = 1.0;
  bool closed_upper = false;

  bool contains(double radius_mm) const {
    return radius_mm >= lo_mm && (closed_upper ? radius_mm <= hi_mm : radius_mm < hi_mm);
  }
};

/// tiny [2,5), small [5,10), medium [10,25), large [25,44] mm with
/// eccentricity caps 1.0 / 1.5 / 2.0 / 3.0.
std::vector<SizeClass> default_size_classes();

const SizeClass& find_size_class(const std::vector<SizeClass>& classes, std::string_view name);

/// Bin index for a lesion radius. Radii below the first bin fall into the
/// first bin and radii above the last bin into the last, so every lesion is
/// counted exactly once.
std::size_t size_bin(const std::vector<SizeClass>& classes, double radius_mm);

void validate(const std::vector<SizeClass>& classes);

}  // namespace tumorsynth
