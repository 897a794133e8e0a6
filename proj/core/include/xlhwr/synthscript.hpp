#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xlhwr/raster.hpp"
#include "xlhwr/text.hpp"

namespace xlhwr {

enum class Zone { kMiddle, kUpper, kLower };

const char* zone_name(Zone z);
Zone zone_from_name(const std::string& name);

struct StrokePoint {
  double x = 0.0;
  double y = 0.0;
};
using Stroke = std::vector<StrokePoint>;  // polyline in the unit box

struct GlyphDef {
  std::string id;
  std::vector<Stroke> strokes;
  Zone zone = Zone::kMiddle;
};

// One composite character = a middle base plus optional zone modifiers.
struct Decomp {
  std::string base;
  std::optional<std::string> upper;
  std::optional<std::string> lower;
};

struct SyntheticScript {
  std::string id;
  std::vector<GlyphDef> middle;
  std::vector<GlyphDef> upper;
  std::vector<GlyphDef> lower;
  std::map<std::string, Decomp> decomposition;  // composite char -> parts
  bool has_matra = true;

  const GlyphDef* find_glyph(Zone zone, const std::string& id) const;
  // Bare composite ids in generation order (these double as the middle
  // character inventory used by HMMs, LUTs and the similarity score).
  std::vector<std::string> base_chars() const;
  std::vector<std::string> composite_chars() const;
};

struct ModifierTruth {
  Zone zone = Zone::kUpper;
  std::string label;
  int x0 = 0, x1 = 0;
  int base_index = 0;
};

struct GroundTruth {
  Word transcription;
  int matra_top = 0, matra_bottom = 0;
  std::vector<std::array<int, 2>> char_x;  // per character [x0, x1]
  std::vector<ModifierTruth> modifiers;
};

struct RenderStyle {
  double thickness = 2.0;     // stroke brush diameter, px
  double slant = 0.0;         // shear, degrees clockwise from vertical
  double jitter = 1.5;        // elastic displacement amplitude, px
  double scale_noise = 0.10;  // per-glyph scale spread, fraction
  double pepper = 0.0;        // background speck rate, fraction of pixels
};

// Canvas geometry shared by the renderer and the zone heuristics.
inline constexpr int kCanvasHeight = 64;
inline constexpr int kCharCellWidth = 24;
inline constexpr int kCanvasMargin = 4;
inline constexpr int kMatraTop = 14;
inline constexpr int kMatraBottom = 16;  // 3 px band at default style

// Deterministic script with separable glyph classes. n_middle >= 2.
SyntheticScript random_script(const std::string& script_id, int n_middle,
                              int n_upper, int n_lower, std::uint64_t seed);

struct DerivedScript {
  SyntheticScript script;
  // Ground-truth glyph correspondence, target id -> source id, for the
  // ceil(rho * n) shared glyphs of each pool.
  std::map<std::string, std::string> mapping;
};

// Derives a target script sharing a ceil(rho*n) fraction of each glyph pool
// with `base` (jittered copies, relabeled by a seeded shuffle); the rest are
// fresh random glyphs kept at the separation margin from both pools.
DerivedScript derive_script(const SyntheticScript& base, double overlap,
                            std::uint64_t seed);

struct RenderedWord {
  GrayImage image;
  GroundTruth truth;
};

RenderedWord render_word(const SyntheticScript& script, const Word& word,
                         const RenderStyle& style, std::uint64_t seed);

// Isolated glyph raster (used for SVM training samples and lower-zone
// templates); canvas 32x32, glyph drawn without matra or connectors.
GrayImage render_modifier_sample(const SyntheticScript& script, Zone zone,
                                 const std::string& label,
                                 const RenderStyle& style, std::uint64_t seed);

// Renders n_images words sampled uniformly from `lexicon` into out_dir as
// img_%05d.pgm plus .gt sidecars, and writes manifest.tsv; returns the
// manifest path. Per-image seed is seed ^ index. `jobs` parallelizes the
// renders; output is identical for any jobs value.
std::string gen_dataset(const SyntheticScript& script,
                        const std::vector<Word>& lexicon, int n_images,
                        const RenderStyle& style, std::uint64_t seed,
                        const std::string& out_dir, std::size_t jobs = 1);

}  // namespace xlhwr
