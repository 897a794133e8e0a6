#include "xlhwr/simscore.hpp"

#include <cmath>

#include "doctest.h"
#include "test_support.hpp"
#include "xlhwr/errors.hpp"
#include "xlhwr/rng.hpp"

using namespace xlhwr;
using namespace xlhwr::testsupport;

TEST_CASE("entropy of counts, in bits") {
  CHECK(entropy({{"A", 4}}) == 0.0);
  CHECK(entropy({{"A", 2}, {"B", 2}}) == doctest::Approx(1.0).epsilon(1e-15));
  // -(3/4)log2(3/4) - (1/4)log2(1/4)
  CHECK(entropy({{"A", 3}, {"B", 1}}) ==
        doctest::Approx(0.8112781244591328).epsilon(1e-14));
  CHECK_THROWS_AS(entropy({}), DataError);
  CHECK_THROWS_AS(entropy({{"A", 0}}), DataError);
}

TEST_CASE("normalized entropy divides by 1 + log2(K)") {
  CHECK(normalized_entropy(0.0, 1) == 0.0);
  CHECK(normalized_entropy(1.0, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normalized_entropy(2.0, 4) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(normalized_entropy(1.0, 0), DataError);
  CHECK_THROWS_AS(normalized_entropy(1.5, 2), DataError);  // H > log2 K
}

TEST_CASE("char similarity is 1 - H_N") {
  CHECK(char_similarity(0.0) == 1.0);
  CHECK(char_similarity(0.5) == 0.5);
  CHECK(char_similarity(2.0 / 3.0) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(char_similarity(1.0), DataError);
  CHECK_THROWS_AS(char_similarity(-0.1), DataError);
}

TEST_CASE("script similarity implements the weighted form literally") {
  std::vector<EntropyRecord> records(2);
  records[0].h_n = 0.0;
  records[1].h_n = 0.0;
  CHECK(script_similarity(records, {0.5, 0.5}) == doctest::Approx(0.5));

  std::vector<EntropyRecord> one(1);
  one[0].h_n = 0.5;
  CHECK(script_similarity(one, {1.0}) == doctest::Approx(0.5));

  CHECK_THROWS_AS(script_similarity(records, {0.5, 0.3}), DataError);
  CHECK_THROWS_AS(script_similarity(records, {0.5}), DataError);
}

TEST_CASE("relative similarity is the plain ratio") {
  CHECK(relative_similarity(0.5, 0.5) == 1.0);
  CHECK(relative_similarity(0.25, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(relative_similarity(0.5, 0.0), DataError);
}

TEST_CASE("entropy chain matches the direct formulas on random tables") {
  Rng rng(401);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(12));
    std::map<std::string, int> counts;
    long total = 0;
    for (int i = 0; i < k; ++i) {
      const int c = 1 + static_cast<int>(rng.below(50));
      counts["s" + std::to_string(i)] = c;
      total += c;
    }
    // Direct formula evaluation.
    double h = 0.0;
    for (const auto& [src, c] : counts) {
      const double p = static_cast<double>(c) / static_cast<double>(total);
      h -= p * std::log2(p);
    }
    const double hn = h / (1.0 + std::log2(static_cast<double>(k)));
    CHECK(std::abs(entropy(counts) - h) <= 1e-12);
    CHECK(std::abs(normalized_entropy(h, k) - hn) <= 1e-12);
    CHECK(std::abs(char_similarity(hn) - (1.0 - hn)) <= 1e-12);
  }
}

TEST_CASE("recognition_histogram counts argmax decodes") {
  HmmSet set;
  for (int k = 0; k < 2; ++k) {
    CharHmm m;
    m.id = k == 0 ? "x" : "y";
    m.states = 1;
    m.mixtures = 1;
    m.weights = {1.0};
    m.means.assign(kPhogDim, k == 0 ? 0.0 : 1.0);
    m.vars.assign(kPhogDim, 0.01);
    m.stay = {0.5};
    m.prepare();
    set.models.push_back(std::move(m));
  }
  std::vector<FeatureSequence> samples;
  for (int i = 0; i < 10; ++i) {
    FeatureSequence seq;
    seq.window_width = 8;
    seq.window_shift = 3;
    seq.frames.assign(3, PhogVector(kPhogDim, i < 7 ? 0.05 : 0.95));
    samples.push_back(std::move(seq));
  }
  const auto votes = recognition_histogram(samples, set);
  CHECK(votes.at("x") == 7);
  CHECK(votes.at("y") == 3);
  long total = 0;
  for (const auto& [src, n] : votes) total += n;
  CHECK(total == 10);
  CHECK_THROWS_AS(recognition_histogram({}, set), DataError);
}

TEST_CASE("run_similarity: identical source and self models give S_rel = 1") {
  const SyntheticScript s = random_script("s", 5, 0, 0, 411);
  RenderStyle style;
  const auto templates = templates_of(s);
  const auto samples = char_samples(s, templates, 5, style, 120);
  const HmmSet set = char_models(s, samples, 4, 2, 2);
  const SimilarityReport report = run_similarity(set, samples, set);
  CHECK(report.s_rel == 1.0);  // exact, same code path on both sides
  CHECK(report.m == 5);
  CHECK(static_cast<int>(report.records.size()) == report.m);
  double wsum = 0.0;
  for (double w : report.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& rec : report.records) {
    int nonzero = 0;
    for (const auto& [src, n] : rec.votes) nonzero += (n > 0);
    CHECK(rec.k == nonzero);
    CHECK(rec.s == doctest::Approx(1.0 - rec.h_n));
  }
}

TEST_CASE("similarity matrix has an exact unit diagonal") {
  const SyntheticScript a = random_script("a", 4, 0, 0, 421);
  const SyntheticScript b = random_script("b", 4, 0, 0, 431);
  RenderStyle style;
  const auto ta = templates_of(a);
  const auto tb = templates_of(b);
  const auto sa = char_samples(a, ta, 4, style, 130);
  const auto sb = char_samples(b, tb, 4, style, 140);
  const HmmSet ma = char_models(a, sa, 4, 2, 1);
  const HmmSet mb = char_models(b, sb, 4, 2, 1);
  const SimilarityMatrix matrix =
      similarity_matrix({{"a", &ma, &sa}, {"b", &mb, &sb}});
  REQUIRE(matrix.ids.size() == 2);
  CHECK(matrix.rel[0][0] == 1.0);
  CHECK(matrix.rel[1][1] == 1.0);
  CHECK(matrix.rel[0][1] > 0.0);
  CHECK(matrix.rel[1][0] > 0.0);
  // Asymmetry is allowed; just confirm the cells exist independently.
  CHECK(std::isfinite(matrix.rel[0][1]));
  CHECK(std::isfinite(matrix.rel[1][0]));

  CHECK_THROWS_AS(similarity_matrix({{"a", &ma, &sa}}), DataError);
}

TEST_CASE("two jittered copies of one script stay highly similar") {
  const SyntheticScript base = random_script("s", 5, 0, 0, 441);
  const DerivedScript copy = derive_script(base, 1.0, 7);
  RenderStyle style;
  const auto tb = templates_of(base);
  const auto tc = templates_of(copy.script);
  const auto sb = char_samples(base, tb, 5, style, 150);
  const auto sc = char_samples(copy.script, tc, 5, style, 160);
  const HmmSet mb = char_models(base, sb, 4, 2, 2);
  const HmmSet mc = char_models(copy.script, sc, 4, 2, 2);
  const SimilarityReport rep = run_similarity(mb, sc, mc);
  CHECK(rep.s_rel >= 0.9);
}
