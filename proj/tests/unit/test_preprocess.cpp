#include <doctest.h>

#include <cmath>

#include "tumorsynth/error.hpp"
#include "tumorsynth/preprocess.hpp"

using namespace tumorsynth;

namespace {

CtVolume volume_of(std::vector<float> v) {
  const auto n = static_cast<std::int64_t>(v.size());
  return CtVolume{VoxelGrid(Dims{n, 1, 1}, Spacing{}, std::move(v))};
}

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("clip window") {
  const VoxelGrid out = preprocess(volume_of({500.0f, -1000.0f, 84.0f}), PreprocessParams{});
  CHECK(out[0] == 189.0f);
  CHECK(out[1] == -21.0f);
  CHECK(out[2] == 84.0f);
}

TEST_CASE("normalised values have zero mean and unit std") {
  const VoxelGrid out = preprocess(volume_of({-21.0f, 84.0f, 189.0f}), PreprocessParams{-21, 189, true});
  // population sd of {-21, 84, 189} is 105 * sqrt(2/3)
  const double sd = 105.0 * std::sqrt(2.0 / 3.0);
  CHECK(out[0] == doctest::Approx(-105.0 / sd));
  CHECK(out[1] == doctest::Approx(0.0));
  CHECK(out[2] == doctest::Approx(105.0 / sd));
  double m = 0, s = 0;
  for (float v : out.values()) m += v;
  m /= 3;
  for (float v : out.values()) s += (v - m) * (v - m);
  CHECK(m == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(std::sqrt(s / 3) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("constant volume cannot be normalised") {
  try {
    preprocess(volume_of({300.0f, 400.0f}), PreprocessParams{-21, 189, true});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::zero_variance);
  }
}

TEST_CASE("clipping is idempotent") {
  const CtVolume v = volume_of({-500, -21, 0, 50, 189, 2000});
  const VoxelGrid once = preprocess(v, PreprocessParams{});
  const VoxelGrid twice = preprocess(CtVolume{once}, PreprocessParams{});
  CHECK(once == twice);
}

TEST_CASE("inverted window is rejected") {
  CHECK_THROWS_AS(preprocess(volume_of({1.0f}), PreprocessParams{10, 10, false}), Error);
}

}
