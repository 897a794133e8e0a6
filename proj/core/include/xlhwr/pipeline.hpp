#pragma once

#include <map>
#include <string>
#include <vector>

#include "xlhwr/bundle.hpp"
#include "xlhwr/formats.hpp"
#include "xlhwr/ghmm.hpp"
#include "xlhwr/rbfsvm.hpp"
#include "xlhwr/synthscript.hpp"
#include "xlhwr/wordrec.hpp"
#include "xlhwr/wordspot.hpp"
#include "xlhwr/zoneseg.hpp"

namespace xlhwr {

// Middle-zone features of one word image: split_zones + window_features.
FeatureSequence image_features(const GrayImage& img,
                               const std::vector<LowerTemplate>& templates,
                               int width = kDefaultWindowWidth,
                               int shift = kDefaultWindowShift);

// All ink of a binary image as a single component (for isolated modifier
// sample images, which may rasterize into several blobs).
Component ink_component(const BinaryImage& bin);

struct MiddleTrainOptions {
  int states = kDefaultStates;
  int mixtures = kDefaultMixtures;
  int iters = 8;
  int window_width = kDefaultWindowWidth;
  int window_shift = kDefaultWindowShift;
  std::size_t jobs = 1;
};

struct MiddleTrainOutput {
  HmmSet set;
  std::vector<double> trace;
  int skipped = 0;
  std::map<std::string, int> char_counts;  // training occurrences per char
};

// Flat-start + embedded Baum-Welch over a word-image manifest. Transcriptions
// are reduced to middle-zone base sequences through the decomposition table.
MiddleTrainOutput train_middle_from_manifest(
    const Manifest& manifest, const std::map<std::string, Decomp>& table,
    const std::vector<LowerTemplate>& templates,
    const MiddleTrainOptions& options);

// RBF-SVM over an isolated-modifier manifest (transcription = label).
SvmModel train_modifier_from_manifest(const Manifest& manifest,
                                      double cost = kDefaultSvmCost,
                                      double gamma = 0.0);

// Isolated-character manifest -> per-character feature sequences.
std::map<std::string, std::vector<FeatureSequence>> char_samples_from_manifest(
    const Manifest& manifest, const std::vector<LowerTemplate>& templates,
    int width = kDefaultWindowWidth, int shift = kDefaultWindowShift);

// Isolated-modifier manifest -> per-label components.
std::map<std::string, std::vector<Component>> modifier_samples_from_manifest(
    const Manifest& manifest);

// Random lexicon of distinct words (length 3..6); every base character is
// forced to appear somewhere so downstream training covers the alphabet.
std::vector<Word> make_lexicon(const SyntheticScript& script, int size,
                               std::uint64_t seed);

// ---- cmd_synth workspace ----------------------------------------------------

struct SynthParams {
  int n_middle = 20;
  int n_upper = 4;
  int n_lower = 4;
  double overlap = 1.0;
  std::uint64_t seed = 1;
  int lexicon_size = 50;
  int n_train = 500;
  int n_test = 100;
  int samples_per_char = 10;
  RenderStyle style;
  std::string out_dir;
};

SynthParams synth_params_from_config(const Config& cfg,
                                     const std::string& origin);

struct ScriptWorkspace {
  std::string dir;
  std::string script_file;
  std::string lexicon_file;
  std::string train_manifest;
  std::string test_manifest;
  std::string chars_manifest;
  std::string upper_manifest;  // empty when the script has no upper glyphs
  std::string lower_manifest;
  std::string templates_dir;
};

struct SynthOutput {
  ScriptWorkspace source;
  ScriptWorkspace target;
  std::string mapping_file;
};

// Generates the full paired-script workspace: scripts, lexicons, train/test
// datasets, isolated char/modifier sample sets, lower-zone templates and the
// glyph correspondence ground truth.
SynthOutput run_synth(const SynthParams& params, std::size_t jobs = 1);

}  // namespace xlhwr
