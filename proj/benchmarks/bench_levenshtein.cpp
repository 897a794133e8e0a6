#include <benchmark/benchmark.h>

#include "xlhwr/rng.hpp"
#include "xlhwr/wordrec.hpp"

namespace {

xlhwr::Word random_word(int len, std::uint64_t seed) {
  xlhwr::Rng rng(seed);
  xlhwr::Word w;
  for (int i = 0; i < len; ++i)
    w.push_back(std::string(1, static_cast<char>('a' + rng.below(20))));
  return w;
}

void BM_Levenshtein(benchmark::State& state) {
  const auto a = random_word(static_cast<int>(state.range(0)), 3);
  const auto b = random_word(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(xlhwr::levenshtein(a, b));
}
BENCHMARK(BM_Levenshtein)->Arg(6)->Arg(12)->Arg(32);

}  // namespace
