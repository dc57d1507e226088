#include <benchmark/benchmark.h>

#include <random>

#include "autocrop/boosting.hpp"
#include "autocrop/cnn.hpp"
#include "autocrop/data.hpp"
#include "autocrop/parallel.hpp"

namespace {

using namespace autocrop;

void BM_Conv2dSame(benchmark::State& state) {
  const int in = static_cast<int>(state.range(0));
  const int side = static_cast<int>(state.range(1));
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  FeatureMaps maps(in, side, side);
  for (float& v : maps.values) v = u(rng);
  const ExtractorConfig cfg = ExtractorConfig::random(1);
  const ConvLayer& layer = cfg.layers[in == 3 ? 0 : 1];
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_same(maps, layer));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side) * side * kConvKernels * in * 25);
}
BENCHMARK(BM_Conv2dSame)->Args({3, 128})->Args({32, 64})->Args({32, 16})->Unit(benchmark::kMillisecond);

void BM_ExtractFeatures(benchmark::State& state) {
  set_thread_count(1);
  SynthSpec spec;
  spec.min_size = spec.max_size = 320;
  const Image img = synth_image(spec, 0).image;
  const ExtractorConfig cfg = ExtractorConfig::random(7, static_cast<int>(state.range(0)));
  const CropRegion frame = full_frame(img.dims());
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(img, frame, cfg));
}
BENCHMARK(BM_ExtractFeatures)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_BoostFit(benchmark::State& state) {
  set_thread_count(1);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  FeatureMatrix x(n, kFeatureDim);
  for (std::size_t i = 0; i < n; ++i)
    for (float& v : x.row(i)) v = u(rng);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x.at(i, 5) - 0.5 * x.at(i, 17);
  BoostParams p;  // M=20, S=4, Q=64
  for (auto _ : state) benchmark::DoNotOptimize(boost_fit(x, y, p));
}
BENCHMARK(BM_BoostFit)->Arg(350)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
