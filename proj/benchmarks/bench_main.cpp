#include <benchmark/benchmark.h>

#include <random>

#include "tumorsynth/components.hpp"
#include "tumorsynth/config.hpp"
#include "tumorsynth/dataset.hpp"
#include "tumorsynth/phantom.hpp"
#include "tumorsynth/shape.hpp"
#include "tumorsynth/texture.hpp"

using namespace tumorsynth;

namespace {

// one tumor, end to end, on a host of edge^3 voxels at 1 mm
void BM_SynthesizeOneTumor(benchmark::State& state) {
  const auto edge = state.range(0);
  PhantomSpec s;
  s.dims = {edge, edge, edge};
  s.spacing = {1.0, 1.0, 1.0};
  s.liver_semi_axes_mm = {0.43 * edge, 0.35 * edge, 0.33 * edge};
  s.seed = 3;
  const Phantom host = make_phantom(s);
  const Config cfg;
  const LoadedSource src = prepare_source("bench", host.volume, host.label, cfg.vessel);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_item(src, {"medium"}, seed++, cfg));
  }
}
BENCHMARK(BM_SynthesizeOneTumor)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ConnectedComponents(benchmark::State& state) {
  const auto edge = state.range(0);
  BinaryMask m(Dims{edge, edge, edge}, Spacing{});
  std::mt19937_64 rng(1);
  std::bernoulli_distribution on(0.3);
  for (std::int64_t i = 0; i < m.size(); ++i) {
    if (on(rng)) m.set(i);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(connected_components(m, Connectivity::twentysix));
  }
  state.SetItemsProcessed(state.iterations() * m.size());
}
BENCHMARK(BM_ConnectedComponents)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Texture(benchmark::State& state) {
  const auto edge = state.range(0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_texture(Dims{edge, edge, edge}, TextureSpec{90.0, 25.0, 4, 1.0, seed++}));
  }
}
BENCHMARK(BM_Texture)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ElasticDeform(benchmark::State& state) {
  const double r = static_cast<double>(state.range(0));
  const BinaryMask sphere = make_ellipsoid({r, r, r}, Spacing{}, 1.0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(elastic_deform(sphere, DeformSpec{3.0, 8, 2.0, seed++}));
  }
}
BENCHMARK(BM_ElasticDeform)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
