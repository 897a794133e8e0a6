#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "xlhwr/ghmm.hpp"
#include "xlhwr/rbfsvm.hpp"
#include "xlhwr/xmap.hpp"
#include "xlhwr/zoneseg.hpp"

namespace xlhwr {

// Unit-cost insert/delete/substitute edit distance over character tokens.
int levenshtein(const Word& a, const Word& b);

struct LexiconMatch {
  Word word;
  int distance = 0;
  int lexicon_index = -1;
};

// Minimum edit distance over (candidate, lexicon) pairs; ties prefer the
// earlier lexicon entry. With no candidates the fallback word is ranked
// instead (and is required).
LexiconMatch lexicon_rank(const std::vector<Word>& candidates,
                          const std::vector<Word>& lexicon,
                          const Word* fallback = nullptr);

struct ModifierObservation {
  Zone zone = Zone::kUpper;
  std::string label;  // target-script label ("" when the LUT has no inverse)
  int x0 = 0, x1 = 0;
};

inline constexpr int kAssociationCap = 256;

// Flexible association: each modifier attaches to the character whose
// x-range holds its centroid, or to that character's neighbours; the
// cartesian product of placements (strict-only once the cap is reached) is
// composed with the middle-zone characters into composite-character words.
std::vector<Word> associate_modifiers(
    const std::vector<std::array<int, 2>>& char_x, const Word& middle_word,
    const std::vector<ModifierObservation>& modifiers,
    const std::map<std::string, Decomp>& table);

struct RankedWord {
  Word word;
  int distance = 0;          // Levenshtein part of the combined score
  double log_likelihood = kLogZero;  // middle-zone part (tie-break)
};

struct RecognitionResult {
  std::vector<RankedWord> candidates;  // sorted, up to N
  Word chosen;                         // == candidates.front().word
  Alignment alignment;                 // winning middle-zone hypothesis
  std::vector<ModifierObservation> modifiers;
};

struct ModifierSvms {
  const SvmModel* upper = nullptr;
  const SvmModel* lower = nullptr;
};

inline constexpr int kDefaultTopN = 5;

// The full pipeline: split_zones -> window_features -> N-best decoding over
// the distinct source-mapped lexicon forms -> forced-alignment boundaries,
// modifier classification and flexible association -> Levenshtein ranking
// against the target lexicon. Lowest distance wins, ties by likelihood.
RecognitionResult recognize_word(const GrayImage& img, const HmmSet& source,
                                 const ModifierSvms& svms,
                                 const std::vector<Lut>& luts,
                                 const LexiconTriple& triple,
                                 const std::map<std::string, Decomp>& table,
                                 const std::vector<LowerTemplate>& templates,
                                 int n = kDefaultTopN);

struct RecognitionMetrics {
  double top1 = 0.0;
  double top5 = 0.0;
};

RecognitionMetrics evaluate_recognition(
    const std::vector<std::vector<Word>>& ranked, const std::vector<Word>& gold);

}  // namespace xlhwr
