#include "xlhwr/xmap.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "xlhwr/errors.hpp"

namespace xlhwr {

std::vector<std::string> Lut::inverse(const std::string& source) const {
  std::vector<std::string> out;
  for (const auto& [tgt, src] : mapping)
    if (src == source) out.push_back(tgt);
  return out;
}

std::string recognize_isolated(const HmmSet& source, const FeatureSequence& seq,
                               double* score) {
  if (source.models.empty()) throw DataError("recognize_isolated: empty set");
  const int T = static_cast<int>(seq.frames.size());
  const std::string* best_id = nullptr;
  double best = kLogZero;
  for (const auto& m : source.models) {
    if (T < m.states) continue;
    WordModel wm;
    wm.chars = {m.id};
    wm.chain = {&m};
    wm.log_inter = source.log_inter();
    const double ll = viterbi(seq, wm).log_likelihood;
    if (!best_id || ll > best) {
      best = ll;
      best_id = &m.id;
    }
  }
  if (!best_id)
    throw DataError("recognize_isolated: sample shorter than every model");
  if (score) *score = best;
  return *best_id;
}

namespace {

// Shared vote-to-mapping step: argmax count, ties by higher mean confidence,
// then lexical source order.
void finalize_lut(Lut& lut) {
  for (const auto& [target, hist] : lut.histograms) {
    const std::string* best = nullptr;
    int best_count = -1;
    double best_conf = 0.0;
    // Map iteration is ascending by source label, so full ties keep the
    // lexically lowest source.
    for (const auto& [source, count] : hist) {
      const double conf = lut.confidence.at(target).at(source);
      if (count > best_count || (count == best_count && conf > best_conf)) {
        best = &source;
        best_count = count;
        best_conf = conf;
      }
    }
    lut.mapping[target] = *best;
  }
}

}  // namespace

Lut build_lut_middle(
    const HmmSet& source,
    const std::map<std::string, std::vector<FeatureSequence>>& samples) {
  Lut lut;
  lut.zone = Zone::kMiddle;
  for (const auto& [target, seqs] : samples) {
    if (seqs.empty())
      throw DataError("build_lut_middle: no samples for target '" + target +
                      "'");
    auto& hist = lut.histograms[target];
    std::map<std::string, double> conf_sum;
    for (const auto& seq : seqs) {
      double score = 0.0;
      const std::string won = recognize_isolated(source, seq, &score);
      hist[won] += 1;
      conf_sum[won] += score;
    }
    for (const auto& [src, count] : hist)
      lut.confidence[target][src] = conf_sum[src] / count;
  }
  finalize_lut(lut);
  return lut;
}

Lut build_lut_modifier(
    const SvmModel& source,
    const std::map<std::string, std::vector<Component>>& samples, Zone zone) {
  if (zone == Zone::kMiddle)
    throw DataError("build_lut_modifier: zone must be upper or lower");
  Lut lut;
  lut.zone = zone;
  for (const auto& [target, comps] : samples) {
    if (comps.empty())
      throw DataError("build_lut_modifier: no samples for target '" + target +
                      "'");
    auto& hist = lut.histograms[target];
    std::map<std::string, double> conf_sum;
    for (const auto& comp : comps) {
      const SvmVote vote = classify(source, modifier_features(comp));
      hist[vote.label] += 1;
      int winner_votes = 0;
      for (std::size_t i = 0; i < source.labels.size(); ++i)
        if (source.labels[i] == vote.label) winner_votes = vote.votes[i];
      conf_sum[vote.label] += winner_votes;
    }
    for (const auto& [src, count] : hist)
      lut.confidence[target][src] = conf_sum[src] / count;
  }
  finalize_lut(lut);
  return lut;
}

LexiconTriple make_mid_lexicon(const std::vector<Word>& target_words,
                               const std::map<std::string, Decomp>& table) {
  LexiconTriple triple;
  triple.target = target_words;
  for (const auto& word : target_words) {
    Word middle;
    std::vector<ModifierLayoutEntry> layout;
    for (std::size_t i = 0; i < word.size(); ++i) {
      auto it = table.find(word[i]);
      if (it == table.end())
        throw CoverageError("make_mid_lexicon: undecomposable character '" +
                            word[i] + "' in '" + join_word(word) + "'");
      middle.push_back(it->second.base);
      if (it->second.upper)
        layout.push_back(
            {Zone::kUpper, *it->second.upper, static_cast<int>(i)});
      if (it->second.lower)
        layout.push_back(
            {Zone::kLower, *it->second.lower, static_cast<int>(i)});
    }
    triple.middle.push_back(std::move(middle));
    triple.layout.push_back(std::move(layout));
  }
  return triple;
}

LexiconTriple map_lexicon(LexiconTriple triple, const Lut& lut) {
  triple.source.clear();
  std::vector<std::string> missing;
  for (const auto& middle : triple.middle) {
    Word source;
    for (const auto& c : middle) {
      auto it = lut.mapping.find(c);
      if (it == lut.mapping.end()) {
        if (std::find(missing.begin(), missing.end(), c) == missing.end())
          missing.push_back(c);
        source.push_back(c);
        continue;
      }
      source.push_back(it->second);
    }
    triple.source.push_back(std::move(source));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& c : missing) list += (list.empty() ? "" : ", ") + c;
    throw CoverageError("map_lexicon: no LUT entry for: " + list);
  }
  return triple;
}

std::vector<Word> resolve_one_to_many(const Word& source_labels,
                                      const Lut& lut,
                                      const LexiconTriple& triple) {
  if (source_labels.empty()) return {};

  // Candidate target characters per position.
  std::vector<std::vector<std::string>> cands(source_labels.size());
  for (std::size_t i = 0; i < source_labels.size(); ++i) {
    cands[i] = lut.inverse(source_labels[i]);
    if (cands[i].empty()) return {};
  }

  // Cap the expansion: widest positions collapse to the histogram-best
  // candidate until the product is within bounds.
  double product = 1.0;
  for (const auto& c : cands) product *= static_cast<double>(c.size());
  while (product > kOneToManyCap) {
    std::size_t widest = 0;
    for (std::size_t i = 1; i < cands.size(); ++i)
      if (cands[i].size() > cands[widest].size()) widest = i;
    if (cands[widest].size() <= 1) break;
    const std::string& src = source_labels[widest];
    std::string best = cands[widest][0];
    int best_count = -1;
    for (const auto& t : cands[widest]) {
      auto hit = lut.histograms.find(t);
      int count = 0;
      if (hit != lut.histograms.end()) {
        auto cit = hit->second.find(src);
        if (cit != hit->second.end()) count = cit->second;
      }
      if (count > best_count) {
        best_count = count;
        best = t;
      }
    }
    product /= static_cast<double>(cands[widest].size());
    cands[widest].assign(1, best);
  }

  // Lexicon membership on the middle column.
  std::map<std::string, int> lexicon_index;
  for (std::size_t i = 0; i < triple.middle.size(); ++i) {
    const std::string key = join_word(triple.middle[i]);
    if (!lexicon_index.count(key))
      lexicon_index[key] = static_cast<int>(i);
  }

  std::vector<std::pair<int, Word>> found;
  Word current(source_labels.size());
  auto enumerate = [&](auto&& self, std::size_t pos) -> void {
    if (pos == cands.size()) {
      auto it = lexicon_index.find(join_word(current));
      if (it != lexicon_index.end()) found.emplace_back(it->second, current);
      return;
    }
    for (const auto& t : cands[pos]) {
      current[pos] = t;
      self(self, pos + 1);
    }
  };
  enumerate(enumerate, 0);

  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Word> out;
  for (auto& [idx, w] : found) {
    if (!out.empty() && out.back() == w) continue;
    out.push_back(std::move(w));
  }
  return out;
}

void save_luts(const std::string& path, const std::vector<Lut>& luts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open file for writing");
  for (const auto& lut : luts) {
    for (const auto& [target, source] : lut.mapping) {
      out << zone_name(lut.zone) << '\t' << target << '\t' << source
          << "\thist:";
      // Counts descending, then label ascending.
      std::vector<std::pair<std::string, int>> hist(
          lut.histograms.at(target).begin(), lut.histograms.at(target).end());
      std::sort(hist.begin(), hist.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
      });
      for (std::size_t i = 0; i < hist.size(); ++i)
        out << (i ? "," : "") << hist[i].first << '=' << hist[i].second;
      out << "\n";
    }
  }
  if (!out) throw IoError(path + ": short write");
}

std::vector<Lut> load_luts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open file");
  std::map<std::string, Lut> by_zone;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        cols.push_back(line.substr(start));
        break;
      }
      cols.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (cols.size() != 4 || cols[3].rfind("hist:", 0) != 0)
      throw IoError(path + ":" + std::to_string(lineno) +
                    ": malformed LUT line");
    Lut& lut = by_zone[cols[0]];
    lut.zone = zone_from_name(cols[0]);
    lut.mapping[cols[1]] = cols[2];
    auto& hist = lut.histograms[cols[1]];
    std::istringstream hs(cols[3].substr(5));
    std::string entry;
    while (std::getline(hs, entry, ',')) {
      const std::size_t eq = entry.rfind('=');
      if (eq == std::string::npos)
        throw IoError(path + ":" + std::to_string(lineno) +
                      ": malformed histogram entry '" + entry + "'");
      hist[entry.substr(0, eq)] = std::stoi(entry.substr(eq + 1));
    }
    // Confidence is not persisted; reloaded tables fall back to label order
    // on exact vote ties.
    for (const auto& [src, count] : hist) lut.confidence[cols[1]][src] = 0.0;
  }
  std::vector<Lut> out;
  for (auto& [name, lut] : by_zone) out.push_back(std::move(lut));
  return out;
}

const Lut* find_lut(const std::vector<Lut>& luts, Zone zone) {
  for (const auto& l : luts)
    if (l.zone == zone) return &l;
  return nullptr;
}

}  // namespace xlhwr
