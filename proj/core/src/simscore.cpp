#include "xlhwr/simscore.hpp"

#include <cmath>
#include <fstream>

#include "xlhwr/errors.hpp"
#include "xlhwr/formats.hpp"

namespace xlhwr {

std::map<std::string, int> recognition_histogram(
    const std::vector<FeatureSequence>& samples, const HmmSet& source) {
  if (samples.empty()) throw DataError("recognition_histogram: no samples");
  std::map<std::string, int> votes;
  for (const auto& seq : samples) votes[recognize_isolated(source, seq)] += 1;
  return votes;
}

double entropy(const std::map<std::string, int>& counts) {
  long total = 0;
  for (const auto& [c, n] : counts) total += n;
  if (total <= 0) throw DataError("entropy: counts sum to zero");
  double h = 0.0;
  for (const auto& [c, n] : counts) {
    if (n <= 0) continue;
    const double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

double normalized_entropy(double h, int k) {
  if (k < 1) throw DataError("normalized_entropy: k must be >= 1");
  if (h < 0.0 || h > std::log2(static_cast<double>(k)) + 1e-12)
    throw DataError("normalized_entropy: h outside [0, log2 k]");
  return h / (1.0 + std::log2(static_cast<double>(k)));
}

double char_similarity(double h_n) {
  if (h_n < 0.0 || h_n >= 1.0)
    throw DataError("char_similarity: h_n outside [0, 1)");
  return 1.0 - h_n;
}

double script_similarity(const std::vector<EntropyRecord>& records,
                         const std::vector<double>& weights) {
  if (records.size() != weights.size() || records.empty())
    throw DataError("script_similarity: records and weights must align");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (std::abs(wsum - 1.0) > 1e-6)
    throw DataError("script_similarity: weights sum to " +
                    fmt_double(wsum) + ", not 1");
  double weighted = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i)
    weighted += records[i].h_n * weights[i];
  return (1.0 - weighted) / static_cast<double>(records.size());
}

double relative_similarity(double cross, double self) {
  if (!(self > 0.0)) throw DataError("relative_similarity: zero denominator");
  return cross / self;
}

namespace {

EntropyRecord make_record(const std::string& target_char,
                          std::map<std::string, int> votes) {
  EntropyRecord rec;
  rec.target_char = target_char;
  rec.votes = std::move(votes);
  for (const auto& [src, n] : rec.votes)
    if (n > 0) rec.k += 1;
  rec.h = entropy(rec.votes);
  rec.h_n = normalized_entropy(rec.h, rec.k);
  rec.s = char_similarity(rec.h_n);
  return rec;
}

}  // namespace

SimilarityReport run_similarity(
    const HmmSet& source,
    const std::map<std::string, std::vector<FeatureSequence>>& target_samples,
    const HmmSet& target_self) {
  if (target_samples.empty()) throw DataError("run_similarity: no samples");

  SimilarityReport report;
  report.m = static_cast<int>(target_samples.size());

  std::vector<EntropyRecord> self_records;
  long total_samples = 0;
  for (const auto& [ch, seqs] : target_samples) {
    if (seqs.empty())
      throw DataError("run_similarity: no samples for character '" + ch + "'");
    total_samples += static_cast<long>(seqs.size());
  }
  for (const auto& [ch, seqs] : target_samples) {
    report.records.push_back(make_record(ch, recognition_histogram(seqs, source)));
    self_records.push_back(
        make_record(ch, recognition_histogram(seqs, target_self)));
    report.weights.push_back(static_cast<double>(seqs.size()) /
                             static_cast<double>(total_samples));
  }

  report.s_sim = script_similarity(report.records, report.weights);
  report.s_sim_self = script_similarity(self_records, report.weights);
  report.s_rel = relative_similarity(report.s_sim, report.s_sim_self);
  return report;
}

SimilarityMatrix similarity_matrix(const std::vector<ScriptEntry>& scripts) {
  if (scripts.size() < 2)
    throw DataError("similarity_matrix: need at least 2 scripts");
  SimilarityMatrix out;
  for (const auto& s : scripts) out.ids.push_back(s.id);
  out.rel.assign(scripts.size(), std::vector<double>(scripts.size(), 0.0));
  for (std::size_t t = 0; t < scripts.size(); ++t) {
    for (std::size_t s = 0; s < scripts.size(); ++s) {
      const SimilarityReport rep =
          run_similarity(*scripts[s].models, *scripts[t].samples,
                         *scripts[t].models);
      out.rel[t][s] = rep.s_rel;
    }
  }
  return out;
}

void save_similarity_report(const std::string& path,
                            const SimilarityReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open file for writing");
  out << "#char\tK\tH\tH_N\tS\tW\n";
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& r = report.records[i];
    out << r.target_char << '\t' << r.k << '\t' << fmt_double(r.h) << '\t'
        << fmt_double(r.h_n) << '\t' << fmt_double(r.s) << '\t'
        << fmt_double(report.weights[i]) << "\n";
  }
  out << "#S_sim\t" << fmt_double(report.s_sim) << "\n";
  out << "#S_sim_self\t" << fmt_double(report.s_sim_self) << "\n";
  out << "#S_rel\t" << fmt_double(report.s_rel) << "\n";
  if (!out) throw IoError(path + ": short write");
}

void save_similarity_matrix(const std::string& path,
                            const SimilarityMatrix& matrix) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open file for writing");
  out << "target\\source";
  for (const auto& id : matrix.ids) out << '\t' << id;
  out << "\n";
  for (std::size_t t = 0; t < matrix.ids.size(); ++t) {
    out << matrix.ids[t];
    for (std::size_t s = 0; s < matrix.ids.size(); ++s)
      out << '\t' << fmt_double(matrix.rel[t][s]);
    out << "\n";
  }
  if (!out) throw IoError(path + ": short write");
}

}  // namespace xlhwr
