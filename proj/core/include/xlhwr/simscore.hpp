#pragma once

#include <map>
#include <string>
#include <vector>

#include "xlhwr/ghmm.hpp"
#include "xlhwr/xmap.hpp"

namespace xlhwr {

// Per-target-character entropy record behind the similarity score.
struct EntropyRecord {
  std::string target_char;
  std::map<std::string, int> votes;  // source char -> recognition count
  int k = 0;                         // distinct mapping source characters
  double h = 0.0;                    // entropy, bits
  double h_n = 0.0;                  // h / (1 + log2 k)
  double s = 0.0;                    // 1 - h_n
};

struct SimilarityReport {
  std::vector<EntropyRecord> records;  // cross-script (source models)
  std::vector<double> weights;         // character frequencies, sum 1
  int m = 0;                           // number of target characters
  double s_sim = 0.0;                  // cross-script score
  double s_sim_self = 0.0;             // same-script reference denominator
  double s_rel = 0.0;                  // relative index
};

// Isolated-character argmax decoding histogram of one target character's
// samples against the source models.
std::map<std::string, int> recognition_histogram(
    const std::vector<FeatureSequence>& samples, const HmmSet& source);

// Entropy in bits; zero-count entries contribute nothing.
double entropy(const std::map<std::string, int>& counts);

// h / (1 + log2(k)); the +1 keeps k = 1 finite.
double normalized_entropy(double h, int k);

// 1 - h_n.
double char_similarity(double h_n);

// (1 - sum_i h_n(i) * w(i)) / M, weights must sum to 1 within 1e-6.
double script_similarity(const std::vector<EntropyRecord>& records,
                         const std::vector<double>& weights);

// Ratio of cross-script to self-script similarity; 1 when equal.
double relative_similarity(double cross, double self);

// Full pipeline: per-character histograms against the source models and the
// target's own models, weights from sample frequencies, Eq-by-Eq assembly.
SimilarityReport run_similarity(
    const HmmSet& source,
    const std::map<std::string, std::vector<FeatureSequence>>& target_samples,
    const HmmSet& target_self);

struct ScriptEntry {
  std::string id;
  const HmmSet* models = nullptr;
  const std::map<std::string, std::vector<FeatureSequence>>* samples = nullptr;
};

struct SimilarityMatrix {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rel;  // [target][source]
};

// Pairwise relative similarity; rows are targets, columns sources, and the
// diagonal is exactly 1.
SimilarityMatrix similarity_matrix(const std::vector<ScriptEntry>& scripts);

// Report TSV: per-char `char<TAB>K<TAB>H<TAB>H_N<TAB>S<TAB>W`.
void save_similarity_report(const std::string& path,
                            const SimilarityReport& report);
// Matrix TSV with a script-id header row/column.
void save_similarity_matrix(const std::string& path,
                            const SimilarityMatrix& matrix);

}  // namespace xlhwr
