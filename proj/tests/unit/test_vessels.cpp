#include <doctest.h>

#include <random>

#include "tumorsynth/error.hpp"
#include "tumorsynth/vessels.hpp"

using namespace tumorsynth;

namespace {

// 40^3 liver block at 90 +- 5 HU with a radius-2 tube along x at 200 HU.
struct TubePhantom {
  CtVolume ct;
  BinaryMask liver;
  BinaryMask tube;
};

TubePhantom tube_phantom() {
  const Dims d{40, 40, 40};
  TubePhantom p{CtVolume{VoxelGrid(d, Spacing{}, -1000.0f)}, BinaryMask(d, Spacing{}),
                BinaryMask(d, Spacing{})};
  std::mt19937 rng(11);
  std::uniform_real_distribution<float> u(-5.0f, 5.0f);
  for (std::int64_t z = 2; z < 38; ++z)
    for (std::int64_t y = 2; y < 38; ++y)
      for (std::int64_t x = 2; x < 38; ++x) {
        p.liver.set(x, y, z);
        const bool in_tube = (y - 20) * (y - 20) + (z - 20) * (z - 20) <= 4;
        p.tube.set(x, y, z, in_tube);
        p.ct.grid(x, y, z) = (in_tube ? 200.0f : 90.0f) + u(rng);
      }
  return p;
}

}  // namespace

TEST_SUITE("vessels") {

TEST_CASE("masked stats") {
  VoxelGrid g(Dims{4, 1, 1}, Spacing{}, std::vector<float>{1, 3, 100, 5});
  BinaryMask m(g.dims(), Spacing{});
  m.set(0);
  m.set(1);
  m.set(3);
  const IntensityStats s = masked_stats(g, m);
  CHECK(s.count == 3);
  CHECK(s.mean == doctest::Approx(3.0));
  CHECK(s.stddev == doctest::Approx(std::sqrt(8.0 / 3.0)));
}

TEST_CASE("constant liver yields no vessels") {
  CtVolume ct{VoxelGrid(Dims{10, 10, 10}, Spacing{}, 90.0f)};
  BinaryMask liver(ct.dims(), Spacing{});
  for (std::int64_t i = 0; i < liver.size(); ++i) liver.set(i);
  CHECK_FALSE(segment_vessels(ct, liver, VesselParams{}).any());
}

TEST_CASE("tube phantom is recovered without false positives") {
  const TubePhantom p = tube_phantom();
  const BinaryMask v = segment_vessels(p.ct, p.liver, VesselParams{});
  std::int64_t hit = 0, false_pos = 0;
  for (std::int64_t i = 0; i < v.size(); ++i) {
    if (v.test(i) && p.tube.test(i)) ++hit;
    if (v.test(i) && !p.tube.test(i)) ++false_pos;
  }
  CHECK(static_cast<double>(hit) >= 0.9 * static_cast<double>(p.tube.count()));
  CHECK(false_pos == 0);
}

TEST_CASE("absolute threshold above the maximum gives nothing") {
  const TubePhantom p = tube_phantom();
  VesselParams params;
  params.mode = VesselMode::absolute;
  params.absolute_hu = 1000.0;
  CHECK_FALSE(segment_vessels(p.ct, p.liver, params).any());
  params.absolute_hu = 150.0;
  CHECK(segment_vessels(p.ct, p.liver, params) == p.tube);
}

TEST_CASE("vessels are a subset of the liver and shrink as k grows") {
  TubePhantom p = tube_phantom();
  // bright tissue outside the liver must never be reported
  p.ct.grid(0, 0, 0) = 3000.0f;
  BinaryMask previous = segment_vessels(p.ct, p.liver, VesselParams{VesselMode::relative, 0.5, 0, 0});
  for (double k : {1.0, 2.0, 4.0, 8.0}) {
    const BinaryMask v = segment_vessels(p.ct, p.liver, VesselParams{VesselMode::relative, k, 0, 0});
    for (std::int64_t i = 0; i < v.size(); ++i) {
      if (v.test(i)) {
        REQUIRE(p.liver.test(i));
        REQUIRE(previous.test(i));
      }
    }
    previous = v;
  }
}

TEST_CASE("empty liver and bad parameters") {
  CtVolume ct{VoxelGrid(Dims{4, 4, 4}, Spacing{}, 90.0f)};
  BinaryMask liver(ct.dims(), Spacing{});
  try {
    segment_vessels(ct, liver, VesselParams{});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_mask);
  }
  liver.set(0);
  CHECK_THROWS_AS(segment_vessels(ct, liver, VesselParams{VesselMode::relative, 0.0, 0, 0}), Error);
  CHECK_THROWS_AS(segment_vessels(ct, BinaryMask(Dims{4, 4, 3}, Spacing{}), VesselParams{}), Error);
}

}
