#pragma once

// Shared fixtures: small trained model sets over synthetic scripts, used by
// the xmap / wordrec / wordspot / simscore suites.

#include <map>
#include <string>
#include <vector>

#include "xlhwr/ghmm.hpp"
#include "xlhwr/pipeline.hpp"
#include "xlhwr/rbfsvm.hpp"
#include "xlhwr/synthscript.hpp"
#include "xlhwr/zoneseg.hpp"

namespace xlhwr::testsupport {

inline std::vector<LowerTemplate> templates_of(const SyntheticScript& s) {
  std::vector<LowerTemplate> out;
  RenderStyle clean;
  clean.jitter = 0.0;
  clean.scale_noise = 0.0;
  for (const auto& g : s.lower) {
    const BinaryImage bin =
        binarize(render_modifier_sample(s, Zone::kLower, g.id, clean, 0));
    const auto comps = connected_components(bin);
    int x0 = bin.width, y0 = bin.height, x1 = -1, y1 = -1;
    for (const auto& c : comps) {
      x0 = std::min(x0, c.x0);
      y0 = std::min(y0, c.y0);
      x1 = std::max(x1, c.x1);
      y1 = std::max(y1, c.y1);
    }
    BinaryImage shape(x1 - x0 + 1, y1 - y0 + 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (bin.at(x, y)) shape.at(x - x0, y - y0) = 1;
    out.push_back({g.id, std::move(shape)});
  }
  return out;
}

inline std::map<std::string, std::vector<FeatureSequence>> char_samples(
    const SyntheticScript& s, const std::vector<LowerTemplate>& templates,
    int per_char, const RenderStyle& style, std::uint64_t seed) {
  std::map<std::string, std::vector<FeatureSequence>> out;
  int idx = 0;
  for (const auto& base : s.base_chars())
    for (int k = 0; k < per_char; ++k)
      out[base].push_back(image_features(
          render_word(s, {base}, style, seed + 131 * idx++).image, templates));
  return out;
}

// Isolated-character models: flat start plus a couple of refinement passes.
inline HmmSet char_models(
    const SyntheticScript& s,
    const std::map<std::string, std::vector<FeatureSequence>>& samples,
    int states = 5, int mixtures = 3, int iters = 3) {
  HmmSet set;
  set.script_id = s.id;
  std::vector<TrainingPair> pairs;
  for (const auto& [ch, seqs] : samples) {
    set.models.push_back(init_model(ch, states, mixtures, seqs));
    for (const auto& seq : seqs) pairs.push_back({seq, {ch}});
  }
  if (iters > 0) set = baum_welch(set, pairs, iters, 2).set;
  return set;
}

inline Component whole_ink(const GrayImage& img) {
  return ink_component(binarize(img));
}

inline SvmModel modifier_svm(const SyntheticScript& s, Zone zone, int per_glyph,
                             const RenderStyle& style, std::uint64_t seed) {
  std::vector<SvmSample> data;
  const auto& pool = zone == Zone::kUpper ? s.upper : s.lower;
  int idx = 0;
  for (const auto& g : pool)
    for (int k = 0; k < per_glyph; ++k)
      data.push_back({modifier_features(whole_ink(render_modifier_sample(
                          s, zone, g.id, style, seed + 977 * idx++))),
                      g.id});
  return train_svm(data);
}

inline std::map<std::string, std::vector<Component>> modifier_samples(
    const SyntheticScript& s, Zone zone, int per_glyph,
    const RenderStyle& style, std::uint64_t seed) {
  std::map<std::string, std::vector<Component>> out;
  const auto& pool = zone == Zone::kUpper ? s.upper : s.lower;
  int idx = 0;
  for (const auto& g : pool)
    for (int k = 0; k < per_glyph; ++k)
      out[g.id].push_back(whole_ink(
          render_modifier_sample(s, zone, g.id, style, seed + 499 * idx++)));
  return out;
}

}  // namespace xlhwr::testsupport
