#include "tumorsynth/grid.hpp"

#include <algorithm>

namespace tumorsynth {

std::string to_string(const Dims& d) {
  return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

BinaryMask::BinaryMask(Grid<std::uint8_t> grid) : grid_(std::move(grid)) {
  for (auto v : grid_.values()) {
    if (v > 1) {
      throw Error(Errc::invalid_argument, "binary mask contains value " + std::to_string(v));
    }
  }
}

BinaryMask BinaryMask::from_nonzero(const Grid<std::uint8_t>& grid) {
  BinaryMask out(grid.dims(), grid.spacing());
  auto src = grid.values();
  auto dst = out.grid_.values();
  std::transform(src.begin(), src.end(), dst.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v != 0); });
  return out;
}

std::int64_t BinaryMask::count() const {
  auto v = grid_.values();
  return std::count(v.begin(), v.end(), std::uint8_t{1});
}

bool BinaryMask::any() const {
  auto v = grid_.values();
  return std::any_of(v.begin(), v.end(), [](std::uint8_t b) { return b != 0; });
}

std::vector<std::int64_t> BinaryMask::foreground() const {
  std::vector<std::int64_t> out;
  auto v = grid_.values();
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(v.size()); ++i) {
    if (v[i]) out.push_back(i);
  }
  return out;
}

LabelMask::LabelMask(Grid<std::uint8_t> grid) : grid_(std::move(grid)) {
  for (auto v : grid_.values()) {
    if (v > kTumor) {
      throw Error(Errc::invalid_argument, "label mask contains value " + std::to_string(v));
    }
  }
}

void LabelMask::assign(std::int64_t i, std::uint8_t label) {
  if (label > kTumor) {
    throw Error(Errc::invalid_argument, "label " + std::to_string(label) + " out of range");
  }
  grid_[i] = label;
}

BinaryMask LabelMask::select_at_least(std::uint8_t min_label) const {
  BinaryMask out(dims(), spacing());
  for (std::int64_t i = 0; i < grid_.size(); ++i) {
    if (grid_[i] >= min_label) out.set(i);
  }
  return out;
}

BinaryMask LabelMask::select(std::uint8_t label) const {
  BinaryMask out(dims(), spacing());
  for (std::int64_t i = 0; i < grid_.size(); ++i) {
    if (grid_[i] == label) out.set(i);
  }
  return out;
}

}  // namespace tumorsynth
