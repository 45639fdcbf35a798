#include "tumorsynth/size_class.hpp"

#include "tumorsynth/error.hpp"

namespace tumorsynth {

std::vector<SizeClass> default_size_classes() {
  return {
      {"tiny", 2.0, 5.0, 1.0, false},
      {"small", 5.0, 10.0, 1.5, false},
      {"medium", 10.0, 25.0, 2.0, false},
      {"large", 25.0, 44.0, 3.0, true},
  };
}

const SizeClass& find_size_class(const std::vector<SizeClass>& classes, std::string_view name) {
  for (const auto& c : classes) {
    if (c.name == name) return c;
  }
  throw Error(Errc::invalid_argument, "unknown size class '" + std::string(name) + "'");
}

std::size_t size_bin(const std::vector<SizeClass>& classes, double radius_mm) {
  if (classes.empty()) throw Error(Errc::invalid_argument, "no size classes configured");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (radius_mm < classes[i].hi_mm || (classes[i].closed_upper && radius_mm == classes[i].hi_mm)) {
      return i;
    }
  }
  return classes.size() - 1;
}

void validate(const std::vector<SizeClass>& classes) {
  if (classes.empty()) throw Error(Errc::config, "size_classes must not be empty");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& c = classes[i];
    if (c.name.empty()) throw Error(Errc::config, "size class without a name");
    if (!(c.lo_mm > 0.0 && c.lo_mm < c.hi_mm)) {
      throw Error(Errc::config, "size class '" + c.name + "' needs 0 < lo < hi");
    }
    if (!(c.eccentricity_cap >= 1.0)) {
      throw Error(Errc::config, "size class '" + c.name + "' eccentricity_cap must be >= 1");
    }
    if (i > 0 && c.lo_mm < classes[i - 1].hi_mm) {
      throw Error(Errc::config, "size classes must be ordered and non-overlapping");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (classes[j].name == c.name) throw Error(Errc::config, "duplicate size class " + c.name);
    }
  }
}

}  // namespace tumorsynth
