#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tumorsynth/components.hpp"

using namespace tumorsynth;

namespace {

std::vector<std::vector<std::int64_t>> as_lists(const std::vector<Component>& cs) {
  std::vector<std::vector<std::int64_t>> out;
  for (const auto& c : cs) out.push_back(c.voxels);
  return out;
}

}  // namespace

TEST_SUITE("components") {

TEST_CASE("empty mask has no components") {
  CHECK(connected_components(BinaryMask(Dims{8, 8, 8}, Spacing{})).empty());
}

TEST_CASE("solid 2x2x2 block is one component of 8") {
  BinaryMask m(Dims{6, 6, 6}, Spacing{});
  for (int z = 2; z < 4; ++z)
    for (int y = 2; y < 4; ++y)
      for (int x = 2; x < 4; ++x) m.set(x, y, z);
  const auto cs = connected_components(m);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].count() == 8);
}

TEST_CASE("diagonal neighbours split under 6 and join under 26") {
  BinaryMask m(Dims{4, 4, 4}, Spacing{});
  m.set(1, 1, 1);
  m.set(2, 2, 2);
  CHECK(count_components(m, Connectivity::six) == 2);
  CHECK(count_components(m, Connectivity::twentysix) == 1);
}

TEST_CASE("neighbour offsets") {
  CHECK(neighbor_offsets(Connectivity::six).size() == 6);
  CHECK(neighbor_offsets(Connectivity::twentysix).size() == 26);
}

TEST_CASE("matches union-find oracle on random masks") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const double density = 0.1 + 0.02 * static_cast<double>(seed % 15);
    const BinaryMask m = oracle::random_mask(Dims{16, 16, 16}, density, seed);
    for (auto [conn, n] : {std::pair{Connectivity::six, 6}, std::pair{Connectivity::twentysix, 26}}) {
      CAPTURE(seed);
      CAPTURE(n);
      CHECK(as_lists(connected_components(m, conn)) == oracle::components(m, n));
    }
  }
}

TEST_CASE("remove_small_components drops only small islands") {
  BinaryMask m(Dims{10, 10, 10}, Spacing{});
  m.set(0, 0, 0);
  for (int x = 4; x < 9; ++x) m.set(x, 5, 5);
  const BinaryMask kept = remove_small_components(m, 3);
  CHECK(kept.count() == 5);
  CHECK_FALSE(kept.test(0, 0, 0));
}

TEST_CASE("equivalent radius") {
  // 65 voxels at 1 mm: (3*65/(4 pi))^(1/3)
  CHECK(equivalent_radius_mm(65, Spacing{}) == doctest::Approx(2.49426).epsilon(1e-5));
  CHECK(equivalent_radius_mm(65, Spacing{}) == doctest::Approx(oracle::sphere_radius(65, Spacing{})));
  CHECK(equivalent_radius_mm(10, Spacing{2, 2, 2}) == doctest::Approx(oracle::sphere_radius(80, Spacing{})));
}

TEST_CASE("crop to foreground") {
  BinaryMask m(Dims{10, 10, 10}, Spacing{});
  m.set(2, 3, 4);
  m.set(5, 3, 6);
  Index3 origin;
  const BinaryMask c = crop_to_foreground(m, &origin);
  CHECK(c.dims() == Dims{4, 1, 3});
  CHECK(origin == Index3{2, 3, 4});
  CHECK(c.count() == 2);
  const auto b = foreground_bounds(BinaryMask(Dims{2, 2, 2}, Spacing{}));
  CHECK(b.empty);
}

}
