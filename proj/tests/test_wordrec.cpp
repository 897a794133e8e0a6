#include "xlhwr/wordrec.hpp"

#include <map>

#include "doctest.h"
#include "test_support.hpp"
#include "xlhwr/errors.hpp"
#include "xlhwr/rng.hpp"

using namespace xlhwr;
using namespace xlhwr::testsupport;

namespace {

Word str_word(const std::string& s) {
  Word w;
  for (char c : s) w.push_back(std::string(1, c));
  return w;
}

// Independent memoized-recursion oracle.
int lev_oracle(const Word& a, const Word& b) {
  std::map<std::pair<std::size_t, std::size_t>, int> memo;
  auto rec = [&](auto&& self, std::size_t i, std::size_t j) -> int {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    const auto key = std::make_pair(i, j);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    int best = self(self, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    best = std::min(best, self(self, i + 1, j) + 1);
    best = std::min(best, self(self, i, j + 1) + 1);
    memo[key] = best;
    return best;
  };
  return rec(rec, 0, 0);
}

}  // namespace

TEST_CASE("levenshtein basics") {
  CHECK(levenshtein(str_word("abc"), str_word("abc")) == 0);
  CHECK(levenshtein({}, str_word("abc")) == 3);
  CHECK(levenshtein(str_word("abc"), {}) == 3);
  CHECK(levenshtein(str_word("kitten"), str_word("sitting")) == 3);
}

TEST_CASE("levenshtein agrees with the DP oracle on 1000 random pairs") {
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const int la = static_cast<int>(rng.below(13));
    const int lb = static_cast<int>(rng.below(13));
    Word a, b;
    for (int i = 0; i < la; ++i)
      a.push_back(std::string(1, static_cast<char>('a' + rng.below(4))));
    for (int i = 0; i < lb; ++i)
      b.push_back(std::string(1, static_cast<char>('a' + rng.below(4))));
    CHECK(levenshtein(a, b) == lev_oracle(a, b));
  }
}

TEST_CASE("lexicon_rank finds the closest lexicon word") {
  const std::vector<Word> lexicon{str_word("abc"), str_word("xyz")};
  const LexiconMatch exact = lexicon_rank({str_word("abc")}, lexicon);
  CHECK(exact.distance == 0);
  CHECK(exact.word == str_word("abc"));

  const LexiconMatch near = lexicon_rank({str_word("abd")}, lexicon);
  CHECK(near.distance == 1);
  CHECK(near.word == str_word("abc"));

  // Tie between lexicon entries keeps the earlier one.
  const std::vector<Word> tied{str_word("ab"), str_word("cb")};
  const LexiconMatch tie = lexicon_rank({str_word("bb")}, tied);
  CHECK(tie.lexicon_index == 0);

  // Empty candidates fall back to the provided middle-zone word.
  const Word fallback = str_word("abd");
  const LexiconMatch fb = lexicon_rank({}, lexicon, &fallback);
  CHECK(fb.word == str_word("abc"));
  CHECK(fb.distance == 1);

  CHECK_THROWS_AS(lexicon_rank({str_word("a")}, {}), DataError);
  CHECK_THROWS_AS(lexicon_rank({}, lexicon), DataError);
}

namespace {

// Small hand decomposition table: bases a/b/c, composites with one upper (U)
// or lower (L) variant each.
std::map<std::string, Decomp> hand_table() {
  std::map<std::string, Decomp> t;
  for (const std::string base : {"a", "b", "c"}) {
    t[base] = Decomp{base, {}, {}};
    t[base + "U"] = Decomp{base, "u0", {}};
    t[base + "L"] = Decomp{base, {}, "l0"};
  }
  return t;
}

}  // namespace

TEST_CASE("associate_modifiers: no modifiers yields the base word") {
  const auto table = hand_table();
  const std::vector<std::array<int, 2>> char_x{{0, 9}, {10, 19}, {20, 29}};
  const auto out =
      associate_modifiers(char_x, str_word("abc"), {}, table);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == str_word("abc"));
}

TEST_CASE("associate_modifiers: one centered modifier gives 3 placements") {
  const auto table = hand_table();
  const std::vector<std::array<int, 2>> char_x{{0, 9}, {10, 19}, {20, 29}};
  const std::vector<ModifierObservation> mods{
      {Zone::kUpper, "u0", 12, 17}};  // centroid on char 1
  const auto out = associate_modifiers(char_x, str_word("abc"), mods, table);
  REQUIRE(out.size() == 3);
  // Strict placement first.
  CHECK(out[0] == Word{"a", "bU", "c"});
  const Word prev{"aU", "b", "c"};
  const Word next{"a", "b", "cU"};
  CHECK(std::count(out.begin(), out.end(), prev) == 1);
  CHECK(std::count(out.begin(), out.end(), next) == 1);
}

TEST_CASE("associate_modifiers clamps at the word edges") {
  const auto table = hand_table();
  const std::vector<std::array<int, 2>> char_x{{0, 9}, {10, 19}};
  const std::vector<ModifierObservation> mods{{Zone::kLower, "l0", 1, 6}};
  const auto out = associate_modifiers(char_x, str_word("ab"), mods, table);
  REQUIRE(out.size() == 2);  // no predecessor for index 0
  CHECK(out[0] == Word{"aL", "b"});
  CHECK(out[1] == Word{"a", "bL"});
}

TEST_CASE("associate_modifiers caps the expansion at 256 candidates") {
  const auto table = hand_table();
  std::vector<std::array<int, 2>> char_x;
  Word middle;
  for (int i = 0; i < 12; ++i) {
    char_x.push_back({i * 10, i * 10 + 9});
    middle.push_back(i % 2 ? "b" : "a");
  }
  std::vector<ModifierObservation> mods;
  for (int i = 0; i < 12; ++i)
    mods.push_back({Zone::kUpper, "u0", i * 10 + 2, i * 10 + 7});
  const auto out = associate_modifiers(char_x, middle, mods, table);
  CHECK(!out.empty());
  CHECK(out.size() <= 256);
  // The strict candidate (every modifier on its own char) is present.
  Word strict;
  for (int i = 0; i < 12; ++i) strict.push_back(middle[i] + "U");
  CHECK(std::count(out.begin(), out.end(), strict) == 1);
}

TEST_CASE("associate_modifiers drops unlabeled observations") {
  const auto table = hand_table();
  const std::vector<std::array<int, 2>> char_x{{0, 9}};
  const std::vector<ModifierObservation> mods{{Zone::kUpper, "", 2, 7}};
  const auto out = associate_modifiers(char_x, str_word("a"), mods, table);
  REQUIRE(out.size() == 1);
  CHECK(out[0] == str_word("a"));
}

TEST_CASE("evaluate_recognition counts exact top-1/top-5 matches") {
  const std::vector<Word> gold{str_word("aa"), str_word("bb"), str_word("cc")};
  std::vector<std::vector<Word>> ranked{
      {str_word("aa"), str_word("xx")},                  // top1 hit
      {str_word("xx"), str_word("yy"), str_word("bb")},  // rank 3
      {str_word("zz")}};                                 // miss
  const RecognitionMetrics m = evaluate_recognition(ranked, gold);
  CHECK(m.top1 == doctest::Approx(1.0 / 3));
  CHECK(m.top5 == doctest::Approx(2.0 / 3));
  CHECK(m.top5 >= m.top1);

  // All correct at rank 1.
  const RecognitionMetrics all =
      evaluate_recognition({{gold[0]}, {gold[1]}, {gold[2]}}, gold);
  CHECK(all.top1 == 1.0);
  CHECK(all.top5 == 1.0);

  CHECK_THROWS_AS(evaluate_recognition({{}}, gold), DataError);
}

TEST_CASE("recognize_word: exact self-script fixture ranks the true word first") {
  const SyntheticScript s = random_script("s", 5, 2, 2, 211);
  RenderStyle style;
  const auto templates = templates_of(s);
  const auto samples = char_samples(s, templates, 6, style, 10);
  HmmSet set = char_models(s, samples, 5, 2, 3);
  set.window_width = kDefaultWindowWidth;
  set.window_shift = kDefaultWindowShift;

  // Identity LUTs for the self-script setting.
  std::vector<Lut> luts;
  Lut middle;
  middle.zone = Zone::kMiddle;
  for (const auto& base : s.base_chars()) {
    middle.mapping[base] = base;
    middle.histograms[base] = {{base, 10}};
  }
  luts.push_back(middle);
  Lut upper;
  upper.zone = Zone::kUpper;
  for (const auto& g : s.upper) {
    upper.mapping[g.id] = g.id;
    upper.histograms[g.id] = {{g.id, 10}};
  }
  luts.push_back(upper);
  Lut lower;
  lower.zone = Zone::kLower;
  for (const auto& g : s.lower) {
    lower.mapping[g.id] = g.id;
    lower.histograms[g.id] = {{g.id, 10}};
  }
  luts.push_back(lower);

  const SvmModel upper_svm = modifier_svm(s, Zone::kUpper, 8, style, 20);
  const SvmModel lower_svm = modifier_svm(s, Zone::kLower, 8, style, 30);
  const ModifierSvms svms{&upper_svm, &lower_svm};

  const auto bases = s.base_chars();
  std::string with_upper;
  for (const auto& [ch, d] : s.decomposition)
    if (d.upper && d.base == bases[2]) {
      with_upper = ch;
      break;
    }
  const std::vector<Word> lexicon{
      {bases[0], bases[1], bases[2]},
      {bases[2], bases[3], bases[4]},
      {bases[1], with_upper, bases[0]},
      {bases[4], bases[0]},
      {bases[3], bases[3], bases[1], bases[2]},
  };
  LexiconTriple triple = make_mid_lexicon(lexicon, s.decomposition);
  triple = map_lexicon(std::move(triple), middle);

  int top1 = 0, trials = 0;
  for (std::size_t w = 0; w < lexicon.size(); ++w) {
    for (int rep = 0; rep < 2; ++rep) {
      const RenderedWord r =
          render_word(s, lexicon[w], style, 5000 + 31 * trials);
      const RecognitionResult res = recognize_word(
          r.image, set, svms, luts, triple, s.decomposition, templates, 5);
      REQUIRE(!res.candidates.empty());
      if (res.chosen == lexicon[w]) ++top1;
      ++trials;
    }
  }
  CHECK(top1 >= trials - 2);  // allow rare near-duplicate confusions

  LexiconTriple empty;
  const RenderedWord r = render_word(s, lexicon[0], style, 77);
  CHECK_THROWS_AS(recognize_word(r.image, set, svms, luts, empty,
                                 s.decomposition, templates, 5),
                  DataError);
}
