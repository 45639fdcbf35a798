#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tumorsynth/error.hpp"

namespace tumorsynth {

/// Voxel counts along x, y, z.
struct Dims {
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  std::int64_t nz = 0;

  constexpr std::int64_t count() const { return nx * ny * nz; }
  constexpr bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
  }
  constexpr std::int64_t min_extent() const { return std::min({nx, ny, nz}); }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

/// Physical voxel size in millimetres.
struct Spacing {
  double sx = 1.0;
  double sy = 1.0;
  double sz = 1.0;

  constexpr double voxel_volume() const { return sx * sy * sz; }
  friend constexpr bool operator==(const Spacing&, const Spacing&) = default;
};

struct Index3 {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;
  friend constexpr bool operator==(const Index3&, const Index3&) = default;
};

std::string to_string(const Dims& d);

/// Dense 3D scalar field, x-fastest linear order.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(Dims dims, Spacing spacing, T fill = T{})
      : dims_(dims), spacing_(spacing) {
    validate();
    data_.assign(static_cast<std::size_t>(dims.count()), fill);
  }

  Grid(Dims dims, Spacing spacing, std::vector<T> data)
      : dims_(dims), spacing_(spacing), data_(std::move(data)) {
    validate();
    if (static_cast<std::int64_t>(data_.size()) != dims_.count()) {
      throw Error(Errc::invalid_geometry,
                  "grid data length " + std::to_string(data_.size()) +
                      " does not match dims " + to_string(dims_));
    }
  }

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  std::int64_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x + dims_.nx * (y + dims_.ny * z);
  }
  Index3 coords(std::int64_t linear) const {
    const std::int64_t plane = dims_.nx * dims_.ny;
    const std::int64_t z = linear / plane;
    const std::int64_t rem = linear - z * plane;
    return {rem % dims_.nx, rem / dims_.nx, z};
  }

  T& operator()(std::int64_t x, std::int64_t y, std::int64_t z) { return data_[index(x, y, z)]; }
  const T& operator()(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return data_[index(x, y, z)];
  }
  T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  /// Clamped read; out-of-range coordinates snap to the nearest edge voxel.
  const T& clamped(std::int64_t x, std::int64_t y, std::int64_t z) const {
    x = std::clamp<std::int64_t>(x, 0, dims_.nx - 1);
    y = std::clamp<std::int64_t>(y, 0, dims_.ny - 1);
    z = std::clamp<std::int64_t>(z, 0, dims_.nz - 1);
    return data_[index(x, y, z)];
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  template <typename U>
  bool same_geometry(const Grid<U>& other) const {
    return dims_ == other.dims() && spacing_ == other.spacing();
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dims_ == b.dims_ && a.spacing_ == b.spacing_ && a.data_ == b.data_;
  }

 private:
  void validate() const {
    if (dims_.nx <= 0 || dims_.ny <= 0 || dims_.nz <= 0) {
      throw Error(Errc::invalid_geometry, "grid dims must be positive, got " + to_string(dims_));
    }
    if (!(spacing_.sx > 0.0) || !(spacing_.sy > 0.0) || !(spacing_.sz > 0.0)) {
      throw Error(Errc::invalid_geometry, "grid spacing must be positive");
    }
  }

  Dims dims_{};
  Spacing spacing_{};
  std::vector<T> data_;
};

using VoxelGrid = Grid<float>;

/// Grid of {0,1} values.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(Dims dims, Spacing spacing) : grid_(dims, spacing, std::uint8_t{0}) {}
  /// Validates that every value is 0 or 1.
  explicit BinaryMask(Grid<std::uint8_t> grid);

  /// Nonzero voxels become foreground.
  static BinaryMask from_nonzero(const Grid<std::uint8_t>& grid);

  const Grid<std::uint8_t>& grid() const { return grid_; }
  const Dims& dims() const { return grid_.dims(); }
  const Spacing& spacing() const { return grid_.spacing(); }
  std::int64_t size() const { return grid_.size(); }

  bool test(std::int64_t i) const { return grid_[i] != 0; }
  bool test(std::int64_t x, std::int64_t y, std::int64_t z) const { return grid_(x, y, z) != 0; }
  void set(std::int64_t i, bool on = true) { grid_[i] = on ? 1 : 0; }
  void set(std::int64_t x, std::int64_t y, std::int64_t z, bool on = true) {
    grid_(x, y, z) = on ? 1 : 0;
  }

  std::int64_t count() const;
  bool any() const;
  /// Sorted linear indices of foreground voxels.
  std::vector<std::int64_t> foreground() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Grid<std::uint8_t> grid_;
};

/// Label convention: 0 background, 1 liver, 2 tumor.
class LabelMask {
 public:
  static constexpr std::uint8_t kBackground = 0;
  static constexpr std::uint8_t kLiver = 1;
  static constexpr std::uint8_t kTumor = 2;

  LabelMask() = default;
  LabelMask(Dims dims, Spacing spacing) : grid_(dims, spacing, kBackground) {}
  /// Validates that every value lies in {0,1,2}.
  explicit LabelMask(Grid<std::uint8_t> grid);

  const Grid<std::uint8_t>& grid() const { return grid_; }
  const Dims& dims() const { return grid_.dims(); }
  const Spacing& spacing() const { return grid_.spacing(); }

  std::uint8_t operator[](std::int64_t i) const { return grid_[i]; }
  void assign(std::int64_t i, std::uint8_t label);

  /// Voxels whose label is >= `min_label`.
  BinaryMask select_at_least(std::uint8_t min_label) const;
  BinaryMask select(std::uint8_t label) const;

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  Grid<std::uint8_t> grid_;
};

/// Rows of a 3x4 voxel-to-world affine (NIfTI sform convention).
struct Affine {
  std::array<std::array<float, 4>, 3> rows{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}}};
  friend bool operator==(const Affine&, const Affine&) = default;
};

enum class StorageType { uint8, int16, float32 };

/// CT volume in Hounsfield units.
struct CtVolume {
  static constexpr float kMinHu = -1024.0f;
  static constexpr float kMaxHu = 3071.0f;

  VoxelGrid grid;
  Affine affine{};
  StorageType storage = StorageType::int16;

  const Dims& dims() const { return grid.dims(); }
  const Spacing& spacing() const { return grid.spacing(); }
};

inline void require_same_dims(const Dims& a, const Dims& b, const char* what) {
  if (!(a == b)) {
    throw Error(Errc::dimension_mismatch,
                std::string(what) + ": dims " + to_string(a) + " vs " + to_string(b));
  }
}

}  // namespace tumorsynth
