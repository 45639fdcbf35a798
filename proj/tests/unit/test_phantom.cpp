#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tumorsynth/error.hpp"
#include "tumorsynth/phantom.hpp"

using namespace tumorsynth;

TEST_SUITE("phantom") {

TEST_CASE("phantom geometry") {
  PhantomSpec s;
  s.dims = Dims{64, 64, 56};
  s.spacing = Spacing{2, 2, 2};
  s.liver_semi_axes_mm = {40, 36, 30};
  s.seed = 3;
  const Phantom p = make_phantom(s);
  const double expected = 4.0 / 3.0 * std::numbers::pi * 40 * 36 * 30 / 8.0;
  CHECK(static_cast<double>(p.liver.count()) == doctest::Approx(expected).epsilon(0.05));
  CHECK(p.vessels.any());
  for (std::int64_t i = 0; i < p.liver.size(); ++i) {
    if (p.vessels.test(i)) REQUIRE(p.liver.test(i));
    REQUIRE(p.label[i] == (p.liver.test(i) ? LabelMask::kLiver : LabelMask::kBackground));
    REQUIRE(p.volume.grid[i] == std::round(p.volume.grid[i]));
  }
  CHECK(p.volume.grid(0, 0, 0) == -1000.0f);
  CHECK(p.volume.grid(32, 2, 28) == 40.0f);
}

TEST_CASE("phantoms are seeded") {
  PhantomSpec s;
  s.dims = Dims{32, 32, 32};
  s.liver_semi_axes_mm = {20, 20, 20};
  s.seed = 1;
  const Phantom a = make_phantom(s), b = make_phantom(s);
  CHECK(a.volume.grid == b.volume.grid);
  s.seed = 2;
  CHECK_FALSE(make_phantom(s).volume.grid == a.volume.grid);
  s.liver_semi_axes_mm = {0, 20, 20};
  CHECK_THROWS_AS(make_phantom(s), Error);
}

}
