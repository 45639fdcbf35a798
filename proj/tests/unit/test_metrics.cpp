#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tumorsynth/error.hpp"
#include "tumorsynth/metrics.hpp"

using namespace tumorsynth;

namespace {

BinaryMask cube_at(const Dims& d, Index3 lo, int edge) {
  BinaryMask m(d, Spacing{});
  for (int z = 0; z < edge; ++z)
    for (int y = 0; y < edge; ++y)
      for (int x = 0; x < edge; ++x) m.set(lo.x + x, lo.y + y, lo.z + z);
  return m;
}

std::vector<double> lower_edges(const std::vector<SizeClass>& bins) {
  std::vector<double> out;
  for (const auto& b : bins) out.push_back(b.lo_mm);
  return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("dsc cases") {
  const Dims d{8, 8, 8};
  const BinaryMask a = cube_at(d, {0, 0, 0}, 2);
  CHECK(dsc(a, a) == 1.0);
  CHECK(dsc(a, cube_at(d, {4, 4, 4}, 2)) == 0.0);
  // 8 and 8 voxels sharing 4
  BinaryMask b = cube_at(d, {1, 0, 0}, 2);
  CHECK(dsc(a, b) == 0.5);
  CHECK(dsc(BinaryMask(d, Spacing{}), BinaryMask(d, Spacing{})) == 1.0);
}

TEST_CASE("dsc is symmetric and matches the brute-force oracle") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const BinaryMask p = oracle::random_mask(Dims{16, 16, 16}, 0.3, 2 * seed);
    const BinaryMask g = oracle::random_mask(Dims{16, 16, 16}, 0.3, 2 * seed + 1);
    CHECK(dsc(p, g) == oracle::dsc(p, g));
    CHECK(dsc(p, g) == dsc(g, p));
  }
}

TEST_CASE("dsc grows as the prediction covers more of the truth") {
  const Dims d{16, 16, 16};
  const BinaryMask g = oracle::random_mask(d, 0.4, 5);
  BinaryMask p(d, Spacing{});
  double previous = dsc(p, g);
  for (auto i : g.foreground()) {
    p.set(i);
    const double now = dsc(p, g);
    REQUIRE(now > previous);
    previous = now;
  }
  CHECK(previous == 1.0);
}

TEST_CASE("two of three lesions found") {
  const Dims d{30, 30, 30};
  const BinaryMask l1 = cube_at(d, {1, 1, 1}, 3), l2 = cube_at(d, {10, 10, 10}, 3),
                   l3 = cube_at(d, {20, 20, 20}, 3);
  BinaryMask gt(d, Spacing{}), pred(d, Spacing{});
  for (std::int64_t i = 0; i < gt.size(); ++i) {
    gt.set(i, l1.test(i) || l2.test(i) || l3.test(i));
    pred.set(i, l1.test(i) || l2.test(i));
  }
  const auto bins = lesion_sensitivity(pred, gt, default_size_classes());
  std::int64_t total = 0, found = 0;
  for (const auto& b : bins) {
    total += b.total;
    found += b.detected;
  }
  CHECK(total == 3);
  CHECK(found == 2);
  CHECK(static_cast<double>(found) / static_cast<double>(total) == doctest::Approx(0.667).epsilon(1e-3));
  // 27 voxels -> r = 1.86 mm, below the first bin, counted as tiny
  CHECK(bins[0].total == 3);
  const auto none = lesion_sensitivity(BinaryMask(d, Spacing{}), gt, default_size_classes());
  for (const auto& b : none) CHECK(b.detected == 0);
}

TEST_CASE("a 65-voxel lesion is tiny") {
  const Dims d{12, 12, 12};
  BinaryMask gt = cube_at(d, {1, 1, 1}, 4);  // 64
  gt.set(5, 1, 1);
  std::vector<LesionResult> lesions;
  lesion_sensitivity(gt, gt, default_size_classes(), 0.1, &lesions);
  REQUIRE(lesions.size() == 1);
  CHECK(lesions[0].voxels == 65);
  CHECK(lesions[0].radius_mm == doctest::Approx(std::cbrt(3.0 * 65 / (4.0 * std::numbers::pi))));
  CHECK(lesions[0].radius_mm == doctest::Approx(2.49426).epsilon(1e-5));
  CHECK(default_size_classes()[lesions[0].bin].name == "tiny");
}

TEST_CASE("overlap threshold") {
  const Dims d{10, 10, 10};
  const BinaryMask gt = cube_at(d, {0, 0, 0}, 5);  // 125 voxels
  BinaryMask pred(d, Spacing{});
  const auto fg = gt.foreground();
  for (int k = 0; k < 12; ++k) pred.set(fg[static_cast<std::size_t>(k)]);
  CHECK(lesion_sensitivity(pred, gt, default_size_classes(), 0.1)[0].detected == 0);
  pred.set(fg[12]);  // 13 / 125 >= 0.1
  CHECK(lesion_sensitivity(pred, gt, default_size_classes(), 0.1)[0].detected == 1);
}

TEST_CASE("per-lesion sensitivity matches the flood-fill oracle") {
  const auto bins = default_size_classes();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const BinaryMask p = oracle::random_mask(Dims{16, 16, 16}, 0.15, 1000 + seed);
    const BinaryMask g = oracle::random_mask(Dims{16, 16, 16}, 0.08 + 0.005 * static_cast<double>(seed), 2000 + seed);
    const auto got = lesion_sensitivity(p, g, bins, 0.1);
    const auto want = oracle::lesion_tally(p, g, lower_edges(bins), 1, 10);
    for (std::size_t b = 0; b < bins.size(); ++b) {
      CHECK(got[b].total == want[b].total);
      CHECK(got[b].detected == want[b].detected);
    }
  }
}

TEST_CASE("bootstrap intervals") {
  const std::vector<double> same(20, 0.37);
  const auto c = bootstrap_ci(same, 0.95, 500, 1);
  CHECK(c.mean == doctest::Approx(0.37));
  CHECK(c.lo == doctest::Approx(0.37));
  CHECK(c.hi == doctest::Approx(0.37));

  const std::vector<double> one{0.8};
  const auto s = bootstrap_ci(one, 0.95, 100, 1);
  CHECK(s.mean == 0.8);
  CHECK(s.lo == 0.8);
  CHECK(s.hi == 0.8);

  std::vector<double> half(100, 0.0);
  for (int i = 0; i < 50; ++i) half[static_cast<std::size_t>(i)] = 1.0;
  const auto h = bootstrap_ci(half, 0.95, 1000, 7);
  CHECK(h.mean == 0.5);
  CHECK(h.lo > 0.3);
  CHECK(h.hi < 0.7);
  CHECK(h.lo <= 0.5);
  CHECK(h.hi >= 0.5);
  // normal approximation: 0.5 +- 1.96 * 0.05
  CHECK(h.lo == doctest::Approx(0.402).epsilon(0.05));
  CHECK(h.hi == doctest::Approx(0.598).epsilon(0.05));
  CHECK(bootstrap_ci(half, 0.95, 1000, 7).lo == h.lo);

  CHECK_THROWS_AS(bootstrap_ci(std::vector<double>{}, 0.95, 10, 0), Error);
  CHECK_THROWS_AS(bootstrap_ci(one, 1.0, 10, 0), Error);
}

TEST_CASE("report json and table") {
  const Dims d{8, 8, 8};
  const BinaryMask a = cube_at(d, {0, 0, 0}, 3);
  EvalOptions opt;
  std::vector<CaseEval> cases{evaluate_case("a", a, a, opt), evaluate_case("b", BinaryMask(d, Spacing{}), a, opt)};
  const EvalReport r = summarize(cases, opt);
  CHECK(r.dsc.mean == doctest::Approx(0.5));
  CHECK(r.bins[0].total == 2);
  CHECK(r.bins[0].detected == 1);
  const auto j = to_json(r);
  CHECK(j["cases"].size() == 2);
  CHECK(j["sensitivity"]["kind"] == "per-lesion");
  CHECK(format_table(r).find("tiny") != std::string::npos);
}

}
