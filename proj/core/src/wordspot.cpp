#include "xlhwr/wordspot.hpp"

#include <algorithm>
#include <cmath>

#include "xlhwr/errors.hpp"

namespace xlhwr {

KeywordQuery make_query(const Word& word,
                        const std::map<std::string, Decomp>& table,
                        const std::vector<Lut>& luts) {
  const Lut* middle_lut = find_lut(luts, Zone::kMiddle);
  if (!middle_lut) throw DataError("make_query: no middle-zone LUT");

  LexiconTriple triple = make_mid_lexicon({word}, table);
  triple = map_lexicon(std::move(triple), *middle_lut);

  KeywordQuery q;
  q.target = word;
  q.middle = triple.middle[0];
  q.source = triple.source[0];
  q.layout = triple.layout[0];
  for (const auto& entry : q.layout) {
    if (entry.zone == Zone::kUpper)
      q.upper_count += 1;
    else
      q.lower_count += 1;
    ModifierLayoutEntry mapped = entry;
    const Lut* lut = find_lut(luts, entry.zone);
    if (lut) {
      auto it = lut->mapping.find(entry.label);
      if (it == lut->mapping.end())
        throw CoverageError("make_query: modifier '" + entry.label +
                            "' has no LUT entry");
      mapped.label = it->second;
    }
    q.source_layout.push_back(mapped);
  }
  return q;
}

SpotScore spot_score_with_filler(const FeatureSequence& seq,
                                 const KeywordQuery& query, const HmmSet& set,
                                 double filler_ll) {
  SpotScore s;
  s.frames = static_cast<int>(seq.frames.size());
  s.filler_ll = filler_ll;
  WordModel wm = make_word_model(set, query.source);
  if (s.frames < wm.total_states()) return s;  // sentinel reject
  s.keyword_ll = viterbi(seq, wm).log_likelihood;
  s.score = (s.keyword_ll - s.filler_ll) / s.frames;
  return s;
}

SpotScore spot_score(const FeatureSequence& seq, const KeywordQuery& query,
                     const HmmSet& set) {
  WordModel wm = make_word_model(set, query.source);
  if (static_cast<int>(seq.frames.size()) < wm.total_states()) {
    SpotScore s;
    s.frames = static_cast<int>(seq.frames.size());
    return s;
  }
  return spot_score_with_filler(seq, query, set,
                                loop_score(seq, set).log_likelihood);
}

bool decide(const SpotScore& score, double threshold) {
  return score.score >= threshold;
}

double calibrate_threshold(const std::vector<double>& scores,
                           const std::vector<bool>& relevant) {
  if (scores.size() != relevant.size() || scores.empty())
    throw DataError("calibrate_threshold: need aligned, non-empty inputs");
  // Finite candidate thresholds in descending order; accepting at T keeps
  // every score >= T. Ties in F1 go to the larger (stricter) threshold.
  std::vector<double> cand;
  for (double s : scores)
    if (s != kLogZero) cand.push_back(s);
  if (cand.empty()) return 0.0;
  std::sort(cand.begin(), cand.end(), std::greater<>());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  double best_t = cand.front();
  double best_f1 = -1.0;
  for (double t : cand) {
    long tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool accept = scores[i] != kLogZero && scores[i] >= t;
      if (accept && relevant[i]) ++tp;
      if (accept && !relevant[i]) ++fp;
      if (!accept && relevant[i]) ++fn;
    }
    const double f1 = (2.0 * tp) > 0.0 || (fp + fn) > 0
                          ? (2.0 * tp) / (2.0 * tp + fp + fn)
                          : 1.0;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_t = t;
    }
  }
  return best_t;
}

std::vector<SpotHit> rerank_with_modifiers(const std::vector<SpotHit>& hits,
                                           const KeywordQuery& query,
                                           const ModifierSvms& svms,
                                           const HmmSet& set, RerankMode mode) {
  std::vector<SpotHit> kept;
  for (const auto& hit : hits) {
    if (mode == RerankMode::kCounts) {
      if (static_cast<int>(hit.split.upper.size()) == query.upper_count &&
          static_cast<int>(hit.split.lower.size()) == query.lower_count)
        kept.push_back(hit);
      continue;
    }

    // Labels mode: classify the hit's modifiers (source labels) and anchor
    // them to characters via forced alignment of the keyword model.
    WordModel wm = make_word_model(set, query.source);
    if (static_cast<int>(hit.features.frames.size()) < wm.total_states())
      continue;
    const Alignment align = viterbi(hit.features, wm);
    std::vector<std::array<int, 2>> char_x;
    for (const auto& span : align.spans)
      char_x.push_back(
          {span.begin * hit.features.window_shift,
           (span.end - 1) * hit.features.window_shift +
               hit.features.window_width - 1});
    auto base_of = [&](double cx) {
      for (std::size_t i = 0; i < char_x.size(); ++i)
        if (cx >= char_x[i][0] && cx <= char_x[i][1])
          return static_cast<int>(i);
      int best = 0;
      double best_d = std::numeric_limits<double>::max();
      for (std::size_t i = 0; i < char_x.size(); ++i) {
        const double d =
            cx < char_x[i][0] ? char_x[i][0] - cx : cx - char_x[i][1];
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(i);
        }
      }
      return best;
    };

    struct Observed {
      Zone zone;
      std::string label;
      int base;
      bool used = false;
    };
    std::vector<Observed> observed;
    bool classifiable = true;
    auto classify_zone = [&](const std::vector<ZonedComponent>& comps,
                             Zone zone, const SvmModel* svm) {
      for (const auto& zc : comps) {
        if (!svm || zc.component.pixels.empty()) {
          classifiable = false;
          return;
        }
        observed.push_back({zone, classify_component(*svm, zc.component),
                            base_of((zc.x0 + zc.x1) / 2.0), false});
      }
    };
    classify_zone(hit.split.upper, Zone::kUpper, svms.upper);
    classify_zone(hit.split.lower, Zone::kLower, svms.lower);
    if (!classifiable) continue;

    // Multiset match: every query modifier needs a same-zone, same-label
    // observation within one base position, and nothing may be left over.
    bool ok = observed.size() == query.source_layout.size();
    if (ok) {
      for (const auto& want : query.source_layout) {
        bool matched = false;
        for (auto& obs : observed) {
          if (obs.used || obs.zone != want.zone || obs.label != want.label)
            continue;
          if (std::abs(obs.base - want.base_index) > 1) continue;
          obs.used = true;
          matched = true;
          break;
        }
        if (!matched) {
          ok = false;
          break;
        }
      }
    }
    if (ok) kept.push_back(hit);
  }
  return kept;
}

RetrievalMetrics evaluate_retrieval(
    const std::vector<KeywordOutcome>& keywords) {
  RetrievalMetrics out;
  if (keywords.empty()) throw DataError("evaluate_retrieval: no keywords");
  for (std::size_t k = 0; k < keywords.size(); ++k) {
    const auto& kw = keywords[k];
    if (kw.scores.size() != kw.relevant.size() ||
        kw.scores.size() != kw.accepted.size())
      throw DataError("evaluate_retrieval: misaligned keyword outcome");

    long relevant_total = 0;
    for (std::size_t i = 0; i < kw.scores.size(); ++i) {
      if (kw.accepted[i] && kw.relevant[i]) ++out.tp;
      if (kw.accepted[i] && !kw.relevant[i]) ++out.fp;
      if (!kw.accepted[i] && kw.relevant[i]) ++out.fn;
      if (kw.relevant[i]) ++relevant_total;
    }

    if (relevant_total == 0) {
      out.zero_relevant.push_back(static_cast<int>(k));
      out.ap.push_back(0.0);
      continue;
    }
    // Ranking by descending score, ties by image order.
    std::vector<std::size_t> order(kw.scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return kw.scores[a] > kw.scores[b];
    });
    // Trapezoid under the PR curve, anchored at (recall 0, precision 1).
    double prev_recall = 0.0, prev_precision = 1.0, area = 0.0;
    long hits = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (kw.relevant[order[r]]) ++hits;
      const double recall = static_cast<double>(hits) / relevant_total;
      const double precision =
          static_cast<double>(hits) / static_cast<double>(r + 1);
      area += (recall - prev_recall) * (precision + prev_precision) / 2.0;
      prev_recall = recall;
      prev_precision = precision;
    }
    out.ap.push_back(area);
  }
  double sum = 0.0;
  for (double a : out.ap) sum += a;
  out.map = sum / static_cast<double>(out.ap.size());
  out.precision = (out.tp + out.fp) > 0
                      ? static_cast<double>(out.tp) / (out.tp + out.fp)
                      : 1.0;
  out.recall = (out.tp + out.fn) > 0
                   ? static_cast<double>(out.tp) / (out.tp + out.fn)
                   : 1.0;
  return out;
}

}  // namespace xlhwr
