#pragma once

#include <map>
#include <string>
#include <vector>

#include "xlhwr/ghmm.hpp"
#include "xlhwr/rbfsvm.hpp"
#include "xlhwr/synthscript.hpp"

namespace xlhwr {

// Majority-vote character table for one zone: every target character maps to
// the source character that won the most per-sample recognitions.
struct Lut {
  Zone zone = Zone::kMiddle;
  std::map<std::string, std::string> mapping;  // target -> source
  // Vote histograms behind the mapping: target -> source -> count.
  std::map<std::string, std::map<std::string, int>> histograms;
  // Mean recognizer confidence per (target, source) vote bucket; the
  // majority-vote tie-breaker.
  std::map<std::string, std::map<std::string, double>> confidence;

  // Source chars that map onto `source` (inverse image), in target order.
  std::vector<std::string> inverse(const std::string& source) const;
};

struct ModifierLayoutEntry {
  Zone zone = Zone::kUpper;
  std::string label;
  int base_index = 0;
};

// The L^T -> L_M^T -> (L_M^S)_LUT lexicon chain, index-aligned.
struct LexiconTriple {
  std::vector<Word> target;  // L^T, composite characters
  std::vector<Word> middle;  // L_M^T, base characters only
  std::vector<Word> source;  // (L_M^S)_LUT, empty until map_lexicon
  std::vector<std::vector<ModifierLayoutEntry>> layout;
};

// Isolated-character recognition with single-model Viterbi over all source
// models; ties by model order. Used by LUT building and simscore.
std::string recognize_isolated(const HmmSet& source,
                               const FeatureSequence& seq,
                               double* score = nullptr);

Lut build_lut_middle(
    const HmmSet& source,
    const std::map<std::string, std::vector<FeatureSequence>>& samples);

Lut build_lut_modifier(
    const SvmModel& source,
    const std::map<std::string, std::vector<Component>>& samples, Zone zone);

// Strips modifiers from every word and records their layout; the source
// column stays empty.
LexiconTriple make_mid_lexicon(const std::vector<Word>& target_words,
                               const std::map<std::string, Decomp>& table);

// Fills the source column by per-character substitution through `lut`.
LexiconTriple map_lexicon(LexiconTriple triple, const Lut& lut);

inline constexpr int kOneToManyCap = 10000;

// Enumerates all target middle-zone words whose LUT image is
// `source_labels`, keeping only words present in triple.middle (lexicon
// order, deduplicated). Enumeration beyond the cap fixes the widest
// positions greedily by histogram frequency.
std::vector<Word> resolve_one_to_many(const Word& source_labels,
                                      const Lut& lut,
                                      const LexiconTriple& triple);

// LUT file: lines `zone<TAB>target<TAB>source<TAB>hist:src1=7,src2=3`.
void save_luts(const std::string& path, const std::vector<Lut>& luts);
std::vector<Lut> load_luts(const std::string& path);
const Lut* find_lut(const std::vector<Lut>& luts, Zone zone);

}  // namespace xlhwr
