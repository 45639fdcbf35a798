#include <doctest.h>

#include "oracles.hpp"
#include "tumorsynth/error.hpp"
#include "tumorsynth/morphology.hpp"

using namespace tumorsynth;

TEST_SUITE("morphology") {

TEST_CASE("radius-1 ball is the 6-neighbourhood plus centre") {
  BinaryMask m(Dims{5, 5, 5}, Spacing{});
  m.set(2, 2, 2);
  const BinaryMask d = dilate(m, 1);
  CHECK(d.count() == 7);
  CHECK(d.test(1, 2, 2));
  CHECK_FALSE(d.test(1, 1, 2));
  CHECK(ball_offsets(1).size() == 7);
}

TEST_CASE("empty mask stays empty") {
  const BinaryMask m(Dims{6, 6, 6}, Spacing{});
  CHECK_FALSE(dilate(m, 2).any());
  CHECK_FALSE(erode(m, 2).any());
}

TEST_CASE("single voxel erodes away") {
  BinaryMask m(Dims{5, 5, 5}, Spacing{});
  m.set(2, 2, 2);
  CHECK_FALSE(erode(m, 1).any());
}

TEST_CASE("radius outside [1, extent/2) is an error") {
  const BinaryMask m(Dims{3, 3, 3}, Spacing{});
  CHECK_THROWS_AS(dilate(m, -1), Error);
  CHECK_THROWS_AS(erode(m, 0), Error);
  CHECK_THROWS_AS(dilate(m, 2), Error);  // ball wider than the grid
}

TEST_CASE("dilate and erode match brute-force oracles") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const BinaryMask m = oracle::random_mask(Dims{12, 11, 10}, 0.05 + 0.1 * static_cast<double>(seed), seed);
    for (int r : {1, 2}) {
      CAPTURE(seed);
      CAPTURE(r);
      CHECK(dilate(m, r) == oracle::dilate(m, r));
      CHECK(erode(m, r) == oracle::erode(m, r));
    }
  }
}

TEST_CASE("erode of dilate contains the original") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const BinaryMask m = oracle::random_mask(Dims{14, 14, 14}, 0.2, seed + 100);
    const BinaryMask closed = erode(dilate(m, 2), 2);
    for (std::int64_t i = 0; i < m.size(); ++i) {
      if (m.test(i)) REQUIRE(closed.test(i));
    }
  }
}

TEST_CASE("union and difference") {
  BinaryMask a(Dims{4, 1, 1}, Spacing{}), b(Dims{4, 1, 1}, Spacing{});
  a.set(0);
  a.set(1);
  b.set(1);
  b.set(2);
  CHECK(mask_union(a, b).count() == 3);
  const BinaryMask d = mask_difference(a, b);
  CHECK(d.foreground() == std::vector<std::int64_t>{0});
  CHECK_THROWS_AS(mask_union(a, BinaryMask(Dims{3, 1, 1}, Spacing{})), Error);
}

}
