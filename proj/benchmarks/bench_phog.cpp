#include <benchmark/benchmark.h>

#include "xlhwr/phog.hpp"
#include "xlhwr/rng.hpp"

namespace {

xlhwr::GrayImage random_region(int w, int h) {
  xlhwr::Rng rng(1);
  xlhwr::GrayImage img(w, h);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

void BM_Phog(benchmark::State& state) {
  const auto img = random_region(static_cast<int>(state.range(0)),
                                 static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(xlhwr::phog(img));
}
BENCHMARK(BM_Phog)->Args({8, 32})->Args({150, 150});

void BM_WindowFeatures(benchmark::State& state) {
  xlhwr::Rng rng(2);
  xlhwr::BinaryImage strip(static_cast<int>(state.range(0)), 32);
  for (auto& v : strip.data) v = rng.uniform() < 0.2 ? 1 : 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(xlhwr::window_features(strip, 8, 3));
}
BENCHMARK(BM_WindowFeatures)->Arg(128)->Arg(512);

}  // namespace
