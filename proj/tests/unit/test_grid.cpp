#include <doctest.h>

#include "tumorsynth/error.hpp"
#include "tumorsynth/grid.hpp"

using namespace tumorsynth;

TEST_SUITE("grid") {

TEST_CASE("linear index is x-fastest and coords inverts it") {
  Grid<int> g(Dims{3, 4, 5}, Spacing{});
  CHECK(g.index(1, 0, 0) == 1);
  CHECK(g.index(0, 1, 0) == 3);
  CHECK(g.index(0, 0, 1) == 12);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const Index3 c = g.coords(i);
    CHECK(g.index(c.x, c.y, c.z) == i);
  }
}

TEST_CASE("non-positive dims or spacing are rejected") {
  auto bad_dims = [] { Grid<float>(Dims{0, 4, 4}, Spacing{}); };
  auto bad_spacing = [] { Grid<float>(Dims{2, 2, 2}, Spacing{1.0, 0.0, 1.0}); };
  for (auto f : {+bad_dims, +bad_spacing}) {
    try {
      f();
      FAIL("expected invalid_geometry");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::invalid_geometry);
    }
  }
}

TEST_CASE("data length must match dims") {
  CHECK_THROWS_AS(Grid<float>(Dims{2, 2, 2}, Spacing{}, std::vector<float>(7)), Error);
}

TEST_CASE("clamped read snaps to the edge") {
  Grid<int> g(Dims{2, 2, 2}, Spacing{});
  g(1, 1, 1) = 9;
  CHECK(g.clamped(5, 7, 9) == 9);
  CHECK(g.clamped(-3, -3, -3) == g(0, 0, 0));
}

TEST_CASE("binary mask validates values") {
  Grid<std::uint8_t> g(Dims{2, 1, 1}, Spacing{});
  g[1] = 2;
  CHECK_THROWS_AS(BinaryMask{g}, Error);
  const BinaryMask m = BinaryMask::from_nonzero(g);
  CHECK(m.count() == 1);
  CHECK(m.foreground() == std::vector<std::int64_t>{1});
}

TEST_CASE("label mask rejects labels above tumor") {
  Grid<std::uint8_t> g(Dims{2, 1, 1}, Spacing{});
  g[0] = 3;
  CHECK_THROWS_AS(LabelMask{g}, Error);
  LabelMask l(Dims{3, 1, 1}, Spacing{});
  l.assign(0, LabelMask::kLiver);
  l.assign(1, LabelMask::kTumor);
  CHECK(l.select_at_least(LabelMask::kLiver).count() == 2);
  CHECK(l.select(LabelMask::kTumor).count() == 1);
  CHECK_THROWS_AS(l.assign(2, 7), Error);
}

TEST_CASE("require_same_dims reports dimension_mismatch") {
  try {
    require_same_dims(Dims{1, 2, 3}, Dims{1, 2, 4}, "x");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::dimension_mismatch);
  }
}

}
