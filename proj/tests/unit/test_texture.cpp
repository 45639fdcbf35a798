#include <doctest.h>

#include <cmath>

#include "tumorsynth/error.hpp"
#include "tumorsynth/texture.hpp"

using namespace tumorsynth;

namespace {

double mean_of(const VoxelGrid& g) {
  double s = 0.0;
  for (float v : g.values()) s += v;
  return s / static_cast<double>(g.size());
}

double std_of(const VoxelGrid& g) {
  const double m = mean_of(g);
  double s = 0.0;
  for (float v : g.values()) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(g.size()));
}

// Lag-1 autocorrelation along x.
double lag1(const VoxelGrid& g) {
  const double m = mean_of(g);
  double num = 0.0, den = 0.0;
  const Dims& d = g.dims();
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const double a = g(x, y, z) - m;
        den += a * a;
        if (x + 1 < d.nx) num += a * (g(x + 1, y, z) - m);
      }
  return num / den;
}

}  // namespace

TEST_SUITE("texture") {

TEST_CASE("zero sigma gives exactly mu") {
  const VoxelGrid t = generate_texture(Dims{9, 8, 7}, TextureSpec{87.5, 0.0, 4, 1.0, 3});
  for (float v : t.values()) CHECK(v == 87.5f);
}

TEST_CASE("sample mean near mu on a 64^3 grid") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const VoxelGrid t = generate_texture(Dims{64, 64, 64}, TextureSpec{90.0, 25.0, 4, 1.0, seed});
    CHECK(mean_of(t) >= 88.0);
    CHECK(mean_of(t) <= 92.0);
  }
}

TEST_CASE("blur lowers the sample std for the same seed") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const VoxelGrid sharp = generate_texture(Dims{32, 32, 32}, TextureSpec{90.0, 25.0, 4, 0.0, seed});
    const VoxelGrid soft = generate_texture(Dims{32, 32, 32}, TextureSpec{90.0, 25.0, 4, 1.0, seed});
    CHECK(std_of(soft) < std_of(sharp));
  }
}

TEST_CASE("coarser noise is more correlated") {
  double previous = -1.0;
  for (int f : {1, 2, 4, 8}) {
    const VoxelGrid t = generate_texture(Dims{48, 48, 48}, TextureSpec{0.0, 25.0, f, 0.0, 9});
    const double r = lag1(t);
    CAPTURE(f);
    CHECK(r > previous);
    previous = r;
  }
}

TEST_CASE("textures are seeded") {
  const TextureSpec a{90.0, 25.0, 4, 1.0, 17};
  TextureSpec b = a;
  b.seed = 18;
  CHECK(generate_texture(Dims{16, 16, 16}, a) == generate_texture(Dims{16, 16, 16}, a));
  CHECK_FALSE(generate_texture(Dims{16, 16, 16}, a) == generate_texture(Dims{16, 16, 16}, b));
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(generate_texture(Dims{4, 4, 4}, TextureSpec{90, -1, 4, 1, 0}), Error);
  CHECK_THROWS_AS(generate_texture(Dims{4, 4, 4}, TextureSpec{90, 25, 0, 1, 0}), Error);
  CHECK_THROWS_AS(generate_texture(Dims{4, 4, 4}, TextureSpec{90, 25, 4, -1, 0}), Error);
}

}
