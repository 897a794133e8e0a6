#include <benchmark/benchmark.h>

#include "xlhwr/ghmm.hpp"
#include "xlhwr/rng.hpp"

namespace {

using namespace xlhwr;

FeatureSequence random_sequence(int frames, std::uint64_t seed) {
  Rng rng(seed);
  FeatureSequence seq;
  seq.window_width = 8;
  seq.window_shift = 3;
  for (int t = 0; t < frames; ++t) {
    PhogVector f(kPhogDim);
    for (auto& v : f) v = rng.uniform();
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

HmmSet random_set(int n_models, int states, int mixtures) {
  HmmSet set;
  for (int k = 0; k < n_models; ++k) {
    std::vector<FeatureSequence> data{random_sequence(40, 100 + k),
                                      random_sequence(40, 200 + k)};
    set.models.push_back(
        init_model("c" + std::to_string(k), states, mixtures, data));
  }
  return set;
}

void BM_EmissionViterbi(benchmark::State& state) {
  const HmmSet set = random_set(4, static_cast<int>(state.range(0)),
                                static_cast<int>(state.range(1)));
  const FeatureSequence seq = random_sequence(48, 7);
  const WordModel wm = make_word_model(
      set, {set.models[0].id, set.models[1].id, set.models[2].id});
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(seq, wm));
}
BENCHMARK(BM_EmissionViterbi)->Args({8, 32})->Args({6, 16});

void BM_FillerLoop(benchmark::State& state) {
  const HmmSet set = random_set(static_cast<int>(state.range(0)), 5, 8);
  const FeatureSequence seq = random_sequence(48, 9);
  for (auto _ : state) benchmark::DoNotOptimize(loop_score(seq, set));
}
BENCHMARK(BM_FillerLoop)->Arg(10)->Arg(20);

}  // namespace
