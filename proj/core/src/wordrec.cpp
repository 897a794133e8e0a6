#include "xlhwr/wordrec.hpp"

#include <algorithm>

#include "xlhwr/errors.hpp"

namespace xlhwr {

int levenshtein(const Word& a, const Word& b) {
  const std::size_t la = a.size(), lb = b.size();
  std::vector<int> prev(lb + 1), cur(lb + 1);
  for (std::size_t j = 0; j <= lb; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= la; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= lb; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[lb];
}

LexiconMatch lexicon_rank(const std::vector<Word>& candidates,
                          const std::vector<Word>& lexicon,
                          const Word* fallback) {
  if (lexicon.empty()) throw DataError("lexicon_rank: empty lexicon");
  const std::vector<Word>* pool = &candidates;
  std::vector<Word> fallback_pool;
  if (candidates.empty()) {
    if (!fallback)
      throw DataError("lexicon_rank: no candidates and no fallback word");
    fallback_pool.push_back(*fallback);
    pool = &fallback_pool;
  }
  LexiconMatch best;
  best.distance = -1;
  for (const auto& cand : *pool) {
    for (std::size_t i = 0; i < lexicon.size(); ++i) {
      const int d = levenshtein(cand, lexicon[i]);
      if (best.distance < 0 || d < best.distance ||
          (d == best.distance &&
           static_cast<int>(i) < best.lexicon_index)) {
        best.distance = d;
        best.lexicon_index = static_cast<int>(i);
        best.word = lexicon[i];
      }
    }
  }
  return best;
}

namespace {

// Inverse composition: (base, upper?, lower?) -> composite character, with
// graceful degradation when the exact combination does not exist.
struct Composer {
  std::map<std::string, std::string> index;  // "base\x1Fupper\x1Flower"

  explicit Composer(const std::map<std::string, Decomp>& table) {
    for (const auto& [ch, d] : table) {
      const std::string key = d.base + '\x1F' +
                              (d.upper ? *d.upper : std::string()) + '\x1F' +
                              (d.lower ? *d.lower : std::string());
      index.emplace(key, ch);  // first composite wins on duplicates
    }
  }

  std::string compose(const std::string& base, const std::string& upper,
                      const std::string& lower) const {
    auto probe = [&](const std::string& u,
                     const std::string& l) -> const std::string* {
      auto it = index.find(base + '\x1F' + u + '\x1F' + l);
      return it == index.end() ? nullptr : &it->second;
    };
    if (const auto* c = probe(upper, lower)) return *c;
    if (!upper.empty())
      if (const auto* c = probe(upper, "")) return *c;
    if (!lower.empty())
      if (const auto* c = probe("", lower)) return *c;
    if (const auto* c = probe("", "")) return *c;
    return base;  // scripts where the bare base is its own composite
  }
};

int containing_char(const std::vector<std::array<int, 2>>& char_x,
                    double cx) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < char_x.size(); ++i) {
    if (cx >= char_x[i][0] && cx <= char_x[i][1]) return static_cast<int>(i);
    const double d =
        cx < char_x[i][0] ? char_x[i][0] - cx : cx - char_x[i][1];
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

std::vector<Word> associate_modifiers(
    const std::vector<std::array<int, 2>>& char_x, const Word& middle_word,
    const std::vector<ModifierObservation>& modifiers,
    const std::map<std::string, Decomp>& table) {
  const int n = static_cast<int>(middle_word.size());
  if (n == 0) return {};
  const Composer composer(table);

  // Placement options per usable modifier: strict position first, then the
  // neighbours (clamped at word edges).
  struct Placed {
    const ModifierObservation* mod;
    std::vector<int> options;
  };
  std::vector<Placed> placed;
  for (const auto& m : modifiers) {
    if (m.label.empty()) continue;  // no target-side label to attach
    const int at = containing_char(char_x, (m.x0 + m.x1) / 2.0);
    Placed p{&m, {at}};
    if (at - 1 >= 0) p.options.push_back(at - 1);
    if (at + 1 < n) p.options.push_back(at + 1);
    placed.push_back(std::move(p));
  }

  // Cap the cartesian product; once the cap would be crossed, remaining
  // modifiers keep their strict placement only.
  std::size_t combos = 1;
  for (auto& p : placed) {
    if (combos * p.options.size() > kAssociationCap)
      p.options.resize(1);
    else
      combos *= p.options.size();
  }

  std::vector<Word> out;
  std::vector<int> choice(placed.size(), 0);
  while (true) {
    // Assign modifiers to characters; one label per (char, zone), extras on
    // an occupied slot are dropped for this combination.
    std::vector<std::string> upper_at(n), lower_at(n);
    for (std::size_t k = 0; k < placed.size(); ++k) {
      const int at = placed[k].options[choice[k]];
      auto& slot = placed[k].mod->zone == Zone::kUpper ? upper_at : lower_at;
      if (slot[at].empty()) slot[at] = placed[k].mod->label;
    }
    Word composite;
    composite.reserve(n);
    for (int i = 0; i < n; ++i)
      composite.push_back(
          composer.compose(middle_word[i], upper_at[i], lower_at[i]));
    out.push_back(std::move(composite));

    // Next combination (odometer).
    std::size_t k = 0;
    for (; k < placed.size(); ++k) {
      if (++choice[k] < static_cast<int>(placed[k].options.size())) break;
      choice[k] = 0;
    }
    if (k == placed.size()) break;
  }
  // Dedupe, preserving order (the strict candidate comes first).
  std::vector<Word> unique;
  for (auto& w : out) {
    if (std::find(unique.begin(), unique.end(), w) == unique.end())
      unique.push_back(std::move(w));
  }
  return unique;
}

namespace {

struct Hypothesis {
  Word source_form;
  double log_likelihood;
  Alignment alignment;
};

// Histogram-strongest inverse of one source label; "" when nothing maps.
std::string best_inverse(const Lut& lut, const std::string& source) {
  const auto targets = lut.inverse(source);
  if (targets.empty()) return {};
  const std::string* best = &targets[0];
  int best_count = -1;
  for (const auto& t : targets) {
    int count = 0;
    auto hit = lut.histograms.find(t);
    if (hit != lut.histograms.end()) {
      auto cit = hit->second.find(source);
      if (cit != hit->second.end()) count = cit->second;
    }
    if (count > best_count) {
      best_count = count;
      best = &t;
    }
  }
  return *best;
}

Word greedy_inverse(const Word& source_form, const Lut& lut) {
  Word out;
  for (const auto& s : source_form) {
    const std::string t = best_inverse(lut, s);
    out.push_back(t.empty() ? s : t);
  }
  return out;
}

}  // namespace

RecognitionResult recognize_word(const GrayImage& img, const HmmSet& source,
                                 const ModifierSvms& svms,
                                 const std::vector<Lut>& luts,
                                 const LexiconTriple& triple,
                                 const std::map<std::string, Decomp>& table,
                                 const std::vector<LowerTemplate>& templates,
                                 int n) {
  if (triple.target.empty()) throw DataError("recognize_word: empty lexicon");
  if (triple.source.size() != triple.target.size())
    throw DataError("recognize_word: lexicon has no source column (run map_lexicon)");
  const Lut* middle_lut = find_lut(luts, Zone::kMiddle);
  if (!middle_lut) throw DataError("recognize_word: no middle-zone LUT");

  const ZoneSplit split = split_zones(img, templates);
  const FeatureSequence seq =
      window_features(split.middle, source.window_width, source.window_shift);

  // Distinct source-mapped forms; scoring each form once covers every
  // lexicon entry that shares it.
  std::vector<Word> forms;
  std::map<std::string, int> form_index;
  for (const auto& src : triple.source) {
    const std::string key = join_word(src);
    if (form_index.emplace(key, static_cast<int>(forms.size())).second)
      forms.push_back(src);
  }
  std::vector<WordModel> models;
  models.reserve(forms.size());
  for (const auto& f : forms) models.push_back(make_word_model(source, f));
  const auto nbest = decode_nbest(seq, models, n);

  // Classify modifiers once; labels come back in source script and are
  // pulled to the target side through the modifier LUT inverses.
  RecognitionResult result;
  const Lut* upper_lut = find_lut(luts, Zone::kUpper);
  const Lut* lower_lut = find_lut(luts, Zone::kLower);
  auto observe = [&](const std::vector<ZonedComponent>& comps, Zone zone,
                     const SvmModel* svm, const Lut* lut) {
    for (const auto& zc : comps) {
      ModifierObservation obs;
      obs.zone = zone;
      obs.x0 = zc.x0;
      obs.x1 = zc.x1;
      if (svm && !zc.component.pixels.empty()) {
        const std::string src_label = classify_component(*svm, zc.component);
        if (lut) obs.label = best_inverse(*lut, src_label);
      }
      result.modifiers.push_back(obs);
    }
  };
  observe(split.upper, Zone::kUpper, svms.upper, upper_lut);
  observe(split.lower, Zone::kLower, svms.lower, lower_lut);

  struct Outcome {
    Word word;
    int distance;
    double ll;
    std::size_t hyp;
  };
  std::vector<Outcome> outcomes;
  for (std::size_t h = 0; h < nbest.size(); ++h) {
    const auto& entry = nbest[h];
    const Word& source_form = forms[entry.index];

    // Frame spans -> image x ranges (frame x = index * shift).
    std::vector<std::array<int, 2>> char_x;
    for (const auto& span : entry.alignment.spans)
      char_x.push_back({span.begin * seq.window_shift,
                        (span.end - 1) * seq.window_shift + seq.window_width - 1});

    std::vector<Word> middles =
        resolve_one_to_many(source_form, *middle_lut, triple);
    bool fallback = false;
    if (middles.empty()) {
      middles.push_back(greedy_inverse(source_form, *middle_lut));
      fallback = true;
    }
    std::vector<Word> candidates;
    for (const auto& mid : middles) {
      auto assoc = associate_modifiers(char_x, mid, result.modifiers, table);
      candidates.insert(candidates.end(), assoc.begin(), assoc.end());
    }
    const Word* rank_fallback = fallback ? &middles[0] : nullptr;
    const LexiconMatch match =
        lexicon_rank(candidates, triple.target, rank_fallback);
    outcomes.push_back(
        {match.word, match.distance, entry.log_likelihood, h});
  }

  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const Outcome& a, const Outcome& b) {
                     if (a.distance != b.distance) return a.distance < b.distance;
                     return a.ll > b.ll;
                   });
  for (const auto& o : outcomes) {
    bool dup = false;
    for (const auto& c : result.candidates)
      if (c.word == o.word) {
        dup = true;
        break;
      }
    if (dup) continue;
    result.candidates.push_back({o.word, o.distance, o.ll});
    if (static_cast<int>(result.candidates.size()) >= n) break;
  }
  result.chosen = result.candidates.front().word;
  result.alignment = nbest[outcomes.front().hyp].alignment;
  return result;
}

RecognitionMetrics evaluate_recognition(
    const std::vector<std::vector<Word>>& ranked,
    const std::vector<Word>& gold) {
  if (ranked.size() != gold.size())
    throw DataError("evaluate_recognition: length mismatch");
  if (ranked.empty()) return {};
  double top1 = 0.0, top5 = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (!ranked[i].empty() && ranked[i][0] == gold[i]) top1 += 1.0;
    for (std::size_t k = 0; k < ranked[i].size() && k < 5; ++k) {
      if (ranked[i][k] == gold[i]) {
        top5 += 1.0;
        break;
      }
    }
  }
  const double n = static_cast<double>(ranked.size());
  return {top1 / n, top5 / n};
}

}  // namespace xlhwr
