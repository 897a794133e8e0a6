#pragma once

#include <map>
#include <string>
#include <vector>

#include "xlhwr/ghmm.hpp"
#include "xlhwr/wordrec.hpp"
#include "xlhwr/xmap.hpp"
#include "xlhwr/zoneseg.hpp"

namespace xlhwr {

struct KeywordQuery {
  Word target;  // W as typed by the user
  Word middle;  // middle-zone form
  Word source;  // source-mapped form fed to the keyword HMM
  std::vector<ModifierLayoutEntry> layout;         // target-script labels
  std::vector<ModifierLayoutEntry> source_layout;  // mapped via modifier LUTs
  int upper_count = 0;
  int lower_count = 0;
};

// Two-step query mapping: strip to the middle zone, then substitute through
// the middle LUT. Modifier labels are additionally mapped through the
// upper/lower LUTs when present (used by label-mode re-ranking).
KeywordQuery make_query(const Word& word,
                        const std::map<std::string, Decomp>& table,
                        const std::vector<Lut>& luts);

struct SpotScore {
  double keyword_ll = kLogZero;  // log p(X|W)
  double filler_ll = kLogZero;   // log p(X)
  double score = kLogZero;       // (keyword - filler) / frames; <= 0
  int frames = 0;
};

// Keyword likelihood by Viterbi on the query's source form, filler by the
// character loop; too few frames scores as a -inf reject sentinel. The
// filler term can be precomputed once per image and shared across keywords.
SpotScore spot_score(const FeatureSequence& seq, const KeywordQuery& query,
                     const HmmSet& set);
SpotScore spot_score_with_filler(const FeatureSequence& seq,
                                 const KeywordQuery& query, const HmmSet& set,
                                 double filler_ll);

enum class ThresholdMode { kGlobal, kLocal };

// Accept iff S(X) >= T; the sentinel never passes a finite threshold.
bool decide(const SpotScore& score, double threshold);

// F1-maximizing threshold over a validation set of (score, relevant) pairs;
// candidates are the observed scores, ties resolved towards the larger
// threshold. Used for both the global mode and per-keyword local mode.
double calibrate_threshold(const std::vector<double>& scores,
                           const std::vector<bool>& relevant);

enum class RerankMode { kLabels, kCounts };

struct SpotHit {
  int image = -1;           // caller's corpus index
  ZoneSplit split;          // zones of the hit image
  FeatureSequence features; // middle-zone features of the hit image
  SpotScore score;
};

// Removes hits whose modifier evidence contradicts the query: counts mode
// compares per-zone modifier counts; labels mode classifies each modifier
// and matches the (zone, source label, base index +-1) multiset against the
// query layout, with base indices from forced alignment of the keyword.
std::vector<SpotHit> rerank_with_modifiers(const std::vector<SpotHit>& hits,
                                           const KeywordQuery& query,
                                           const ModifierSvms& svms,
                                           const HmmSet& set, RerankMode mode);

struct KeywordOutcome {
  std::vector<double> scores;   // one per corpus image (sentinels allowed)
  std::vector<bool> accepted;   // decision at the operating threshold
  std::vector<bool> relevant;   // ground truth
};

struct RetrievalMetrics {
  long tp = 0, fp = 0, fn = 0;
  double precision = 1.0;  // TP/(TP+FP), 1 when the denominator is 0
  double recall = 1.0;     // TP/(TP+FN), 1 when the denominator is 0
  std::vector<double> ap;  // per keyword, trapezoidal PR area
  double map = 0.0;
  std::vector<int> zero_relevant;  // flagged keywords (AP defined 0)
};

// AP per keyword is the trapezoidal area under the precision-recall curve of
// the descending-score ranking (anchored at recall 0 / precision 1), ties
// broken by image order; MAP is the mean over keywords.
RetrievalMetrics evaluate_retrieval(const std::vector<KeywordOutcome>& keywords);

}  // namespace xlhwr
