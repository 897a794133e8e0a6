#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "xlhwr/phog.hpp"
#include "xlhwr/text.hpp"

namespace xlhwr {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();
inline constexpr double kVarianceFloor = 1e-4;
inline constexpr double kMixtureWeightFloor = 1e-8;
inline constexpr int kDefaultStates = 8;
inline constexpr int kDefaultMixtures = 32;

// Left-to-right continuous-density HMM for one character: per-state diagonal
// GMM emissions, self-loop + advance transitions only (the last state's
// advance probability is its exit).
struct CharHmm {
  std::string id;
  int states = kDefaultStates;
  int mixtures = kDefaultMixtures;
  int dim = kPhogDim;
  std::vector<double> weights;  // [states * mixtures]
  std::vector<double> means;    // [states * mixtures * dim]
  std::vector<double> vars;     // [states * mixtures * dim]
  std::vector<double> stay;     // [states], P(i -> i); advance = 1 - stay

  // Derived log-space tables; refresh after any parameter change.
  std::vector<double> log_weight_gconst;  // log w_m - 0.5*sum log(2*pi*var)
  std::vector<double> log_stay, log_advance;
  void prepare();
  bool prepared() const { return !log_weight_gconst.empty(); }

  // log p(x | state), via log-sum-exp over the mixture.
  double emission(int state, const double* x) const;

  // Checks the stochastic invariants (weight sums, floors, transition rows).
  void validate() const;
};

struct HmmSet {
  std::string script_id;
  int window_width = kDefaultWindowWidth;
  int window_shift = kDefaultWindowShift;
  std::vector<CharHmm> models;

  const CharHmm* find(const std::string& id) const;
  const CharHmm& at(const std::string& id) const;  // throws CoverageError
  // Uniform inter-character transition cost shared by keyword chains and the
  // filler loop, so filler paths are a strict superset of keyword paths.
  double log_inter() const;
};

struct WordModel {
  Word chars;
  std::vector<const CharHmm*> chain;
  double log_inter = 0.0;

  int total_states() const;
};

// Chain of per-character models; throws CoverageError on missing characters.
WordModel make_word_model(const HmmSet& set, const Word& chars);

struct FrameSpan {
  int begin = 0;
  int end = 0;  // half-open [begin, end)
};

struct Alignment {
  std::vector<FrameSpan> spans;  // one per character, contiguous, covering
  double log_likelihood = kLogZero;
};

// Flat-start estimation: frames uniformly partitioned across states, then a
// fixed-seed k-means per state (deterministic center seeding, <= 20 Lloyd
// iterations, empty clusters refilled from the largest cluster's farthest
// point). Variances floored at 1e-4.
CharHmm init_model(const std::string& id, int nstates, int nmix,
                   const std::vector<FeatureSequence>& sequences);

struct TrainingPair {
  FeatureSequence features;
  Word transcription;
};

struct BaumWelchResult {
  HmmSet set;
  std::vector<double> log_likelihood_trace;  // total data LL per iteration
  int skipped = 0;  // pairs with fewer frames than chain states
};

// Embedded re-estimation over concatenated word models. The trace is
// non-decreasing within 1e-6; stops early when the gain drops below 1e-4
// nats. E-steps may run on `jobs` workers; accumulation order is fixed.
BaumWelchResult baum_welch(const HmmSet& set,
                           const std::vector<TrainingPair>& training,
                           int iters, std::size_t jobs = 1);

// Max-probability monotone state path (log domain), entered at the first
// state and exited from the last; per-character spans from the path.
// Requires frames >= total states.
Alignment viterbi(const FeatureSequence& seq, const WordModel& model);

struct NBestEntry {
  int index = -1;  // position in the scored lexicon
  double log_likelihood = kLogZero;
  Alignment alignment;
};

// Scores every lexicon entry; top n by likelihood, ties kept in lexicon
// order. Entries needing more frames than available are skipped; all
// infeasible is an error.
std::vector<NBestEntry> decode_nbest(const FeatureSequence& seq,
                                     const std::vector<WordModel>& lexicon,
                                     int n);

struct LoopDecode {
  double log_likelihood = kLogZero;
  Word path;
};

// Viterbi over the ergodic loop of all character models (the filler):
// free entry, -log|set| between characters, exit from any model.
LoopDecode loop_score(const FeatureSequence& seq, const HmmSet& set);

}  // namespace xlhwr
