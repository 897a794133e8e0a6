#include "xlhwr/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "xlhwr/errors.hpp"
#include "xlhwr/parallel.hpp"
#include "xlhwr/rng.hpp"

namespace xlhwr {

namespace fs = std::filesystem;

FeatureSequence image_features(const GrayImage& img,
                               const std::vector<LowerTemplate>& templates,
                               int width, int shift) {
  const ZoneSplit split = split_zones(img, templates);
  return window_features(split.middle, width, shift);
}

Component ink_component(const BinaryImage& bin) {
  Component comp;
  comp.x0 = bin.width;
  comp.y0 = bin.height;
  comp.x1 = -1;
  comp.y1 = -1;
  double sx = 0.0, sy = 0.0;
  for (int y = 0; y < bin.height; ++y) {
    for (int x = 0; x < bin.width; ++x) {
      if (!bin.at(x, y)) continue;
      comp.pixels.push_back({x, y});
      comp.x0 = std::min(comp.x0, x);
      comp.x1 = std::max(comp.x1, x);
      comp.y0 = std::min(comp.y0, y);
      comp.y1 = std::max(comp.y1, y);
      sx += x;
      sy += y;
    }
  }
  if (comp.pixels.empty()) throw DataError("ink_component: blank image");
  comp.cx = sx / static_cast<double>(comp.pixels.size());
  comp.cy = sy / static_cast<double>(comp.pixels.size());
  return comp;
}

MiddleTrainOutput train_middle_from_manifest(
    const Manifest& manifest, const std::map<std::string, Decomp>& table,
    const std::vector<LowerTemplate>& templates,
    const MiddleTrainOptions& options) {
  if (manifest.rows.empty())
    throw DataError("train_middle: empty manifest");

  std::set<std::string> tokens;
  for (const auto& [ch, d] : table) tokens.insert(ch);

  // Feature extraction (parallel per image), transcription reduction.
  std::vector<TrainingPair> pairs(manifest.rows.size());
  std::vector<std::string> failures(manifest.rows.size());
  parallel_for(manifest.rows.size(), options.jobs, [&](std::size_t i) {
    try {
      const GrayImage img = load_pgm(manifest.image_path(i));
      pairs[i].features = image_features(img, templates, options.window_width,
                                         options.window_shift);
      const Word word = tokenize_word(manifest.rows[i].transcription, tokens);
      for (const auto& c : word) {
        auto it = table.find(c);
        if (it == table.end())
          throw CoverageError("undecomposable character '" + c + "'");
        pairs[i].transcription.push_back(it->second.base);
      }
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < failures.size(); ++i)
    if (!failures[i].empty())
      throw DataError("train_middle: row " + std::to_string(i + 1) + " (" +
                      manifest.rows[i].image + "): " + failures[i]);

  MiddleTrainOutput out;
  // Flat start: equal per-character frame chunks feed each model's init.
  std::map<std::string, std::vector<FeatureSequence>> chunks;
  for (const auto& pair : pairs) {
    const int T = static_cast<int>(pair.features.frames.size());
    const int k = static_cast<int>(pair.transcription.size());
    if (k == 0 || T < k) continue;
    for (int c = 0; c < k; ++c) {
      const int b = static_cast<int>((static_cast<long long>(c) * T) / k);
      const int e = static_cast<int>((static_cast<long long>(c + 1) * T) / k);
      FeatureSequence chunk;
      chunk.window_width = pair.features.window_width;
      chunk.window_shift = pair.features.window_shift;
      chunk.frames.assign(pair.features.frames.begin() + b,
                          pair.features.frames.begin() + e);
      if (!chunk.frames.empty())
        chunks[pair.transcription[c]].push_back(std::move(chunk));
    }
    for (const auto& c : pair.transcription) out.char_counts[c] += 1;
  }
  if (chunks.empty())
    throw DataError("train_middle: no usable training words");

  out.set.script_id = manifest.script_id;
  out.set.window_width = options.window_width;
  out.set.window_shift = options.window_shift;
  std::vector<std::string> ids;
  for (const auto& [ch, seqs] : chunks) ids.push_back(ch);
  std::vector<CharHmm> models(ids.size());
  parallel_for(ids.size(), options.jobs, [&](std::size_t i) {
    models[i] = init_model(ids[i], options.states, options.mixtures,
                           chunks.at(ids[i]));
  });
  out.set.models = std::move(models);

  BaumWelchResult bw =
      baum_welch(out.set, pairs, options.iters, options.jobs);
  out.set = std::move(bw.set);
  out.trace = std::move(bw.log_likelihood_trace);
  out.skipped = bw.skipped;
  return out;
}

SvmModel train_modifier_from_manifest(const Manifest& manifest, double cost,
                                      double gamma) {
  if (manifest.rows.empty())
    throw DataError("train_modifier: empty manifest");
  std::vector<SvmSample> samples(manifest.rows.size());
  std::vector<std::string> failures(manifest.rows.size());
  parallel_for(manifest.rows.size(), 1, [&](std::size_t i) {
    try {
      const BinaryImage bin = binarize(load_pgm(manifest.image_path(i)));
      samples[i].features = modifier_features(ink_component(bin));
      samples[i].label = manifest.rows[i].transcription;
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < failures.size(); ++i)
    if (!failures[i].empty())
      throw DataError("train_modifier: row " + std::to_string(i + 1) + ": " +
                      failures[i]);
  return train_svm(samples, cost, gamma);
}

std::map<std::string, std::vector<FeatureSequence>> char_samples_from_manifest(
    const Manifest& manifest, const std::vector<LowerTemplate>& templates,
    int width, int shift) {
  std::map<std::string, std::vector<FeatureSequence>> out;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const GrayImage img = load_pgm(manifest.image_path(i));
    out[manifest.rows[i].transcription].push_back(
        image_features(img, templates, width, shift));
  }
  return out;
}

std::map<std::string, std::vector<Component>> modifier_samples_from_manifest(
    const Manifest& manifest) {
  std::map<std::string, std::vector<Component>> out;
  for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
    const BinaryImage bin = binarize(load_pgm(manifest.image_path(i)));
    out[manifest.rows[i].transcription].push_back(ink_component(bin));
  }
  return out;
}

std::vector<Word> make_lexicon(const SyntheticScript& script, int size,
                               std::uint64_t seed) {
  if (size < 1) throw ConfigError("make_lexicon: size must be >= 1");
  Rng rng(seed);

  // Per-base composite choices: bare, or one upper / one lower variant.
  const auto bases = script.base_chars();
  std::map<std::string, std::vector<std::string>> variants;
  for (const auto& [ch, d] : script.decomposition)
    variants[d.base].push_back(ch);

  auto sample_char = [&]() {
    const std::string& base = bases[rng.below(bases.size())];
    const auto& vs = variants.at(base);
    // 50%: bare base; otherwise a uniform modifier variant.
    if (vs.size() == 1 || rng.uniform() < 0.5) return base;
    return vs[rng.below(vs.size())];
  };

  std::set<std::string> seen;
  std::vector<Word> lexicon;
  int guard = 0;
  while (static_cast<int>(lexicon.size()) < size && guard < size * 1000) {
    ++guard;
    const int len = 3 + static_cast<int>(rng.below(4));  // 3..6
    Word w;
    for (int i = 0; i < len; ++i) w.push_back(sample_char());
    if (seen.insert(join_word(w)).second) lexicon.push_back(std::move(w));
  }
  if (static_cast<int>(lexicon.size()) < size)
    throw DataError("make_lexicon: could not draw enough distinct words");

  // Force alphabet coverage: swap unused bases into existing words.
  std::set<std::string> used;
  for (const auto& w : lexicon)
    for (const auto& c : w) used.insert(script.decomposition.at(c).base);
  for (const auto& base : bases) {
    if (used.count(base)) continue;
    Word& w = lexicon[rng.below(lexicon.size())];
    w[rng.below(w.size())] = base;  // bare composite id == base id
    used.insert(base);
  }
  return lexicon;
}

namespace {

// The bare composite id of each base equals the base id by construction in
// random_script; this helper guards that assumption for loaded scripts.
void check_bare_bases(const SyntheticScript& script) {
  for (const auto& g : script.middle) {
    auto it = script.decomposition.find(g.id);
    if (it == script.decomposition.end())
      throw DataError("script '" + script.id + "': base '" + g.id +
                      "' has no bare composite");
  }
}

ScriptWorkspace emit_script_workspace(const SyntheticScript& script,
                                      const SynthParams& params,
                                      const std::string& dir,
                                      std::uint64_t seed, std::size_t jobs) {
  check_bare_bases(script);
  ScriptWorkspace ws;
  ws.dir = dir;
  fs::create_directories(dir);

  ws.script_file = (fs::path(dir) / "script.txt").string();
  save_script(ws.script_file, script);

  const auto lexicon = make_lexicon(script, params.lexicon_size, seed ^ 0x1eULL);
  ws.lexicon_file = (fs::path(dir) / "lexicon.txt").string();
  save_wordlist(ws.lexicon_file, lexicon);

  ws.train_manifest =
      gen_dataset(script, lexicon, params.n_train, params.style, seed ^ 0x7a11,
                  (fs::path(dir) / "train").string(), jobs);
  ws.test_manifest =
      gen_dataset(script, lexicon, params.n_test, params.style, seed ^ 0x7e57,
                  (fs::path(dir) / "test").string(), jobs);

  // Isolated character samples: bare-base words rendered per sample.
  {
    const std::string cdir = (fs::path(dir) / "chars").string();
    fs::create_directories(cdir);
    std::vector<ManifestRow> rows;
    int idx = 0;
    for (const auto& base : script.base_chars()) {
      for (int k = 0; k < params.samples_per_char; ++k) {
        const auto rendered =
            render_word(script, {base}, params.style,
                        seed ^ (0xC0DEULL + static_cast<std::uint64_t>(idx)));
        char name[32];
        std::snprintf(name, sizeof(name), "char_%04d.pgm", idx);
        save_pgm(rendered.image, (fs::path(cdir) / name).string());
        rows.push_back({name, base, std::nullopt});
        ++idx;
      }
    }
    ws.chars_manifest = (fs::path(cdir) / "manifest.tsv").string();
    save_manifest(ws.chars_manifest, script.id, rows);
  }

  // Isolated modifier samples per zone.
  auto emit_modifiers = [&](Zone zone, const std::vector<GlyphDef>& pool,
                            const std::string& sub) -> std::string {
    if (pool.empty()) return {};
    const std::string mdir = (fs::path(dir) / sub).string();
    fs::create_directories(mdir);
    std::vector<ManifestRow> rows;
    int idx = 0;
    for (const auto& g : pool) {
      for (int k = 0; k < params.samples_per_char; ++k) {
        const GrayImage img = render_modifier_sample(
            script, zone, g.id, params.style,
            seed ^ (0x30D5ULL + static_cast<std::uint64_t>(zone == Zone::kLower
                                                               ? 100000 + idx
                                                               : idx)));
        char name[32];
        std::snprintf(name, sizeof(name), "mod_%04d.pgm", idx);
        save_pgm(img, (fs::path(mdir) / name).string());
        rows.push_back({name, g.id, std::nullopt});
        ++idx;
      }
    }
    const std::string manifest = (fs::path(mdir) / "manifest.tsv").string();
    save_manifest(manifest, script.id, rows);
    return manifest;
  };
  ws.upper_manifest = emit_modifiers(Zone::kUpper, script.upper, "mods_upper");
  ws.lower_manifest = emit_modifiers(Zone::kLower, script.lower, "mods_lower");

  // Lower-zone templates: one clean render per lower glyph.
  {
    ws.templates_dir = (fs::path(dir) / "templates").string();
    fs::create_directories(ws.templates_dir);
    RenderStyle clean = params.style;
    clean.jitter = 0.0;
    clean.scale_noise = 0.0;
    clean.pepper = 0.0;
    for (const auto& g : script.lower) {
      const GrayImage img =
          render_modifier_sample(script, Zone::kLower, g.id, clean, 0);
      save_pgm(img, (fs::path(ws.templates_dir) / (g.id + ".pgm")).string());
    }
  }
  return ws;
}

}  // namespace

SynthParams synth_params_from_config(const Config& cfg,
                                     const std::string& origin) {
  SynthParams p;
  auto geti = [&](const char* key, int def, int lo, int hi) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return def;
    int v = 0;
    try {
      v = std::stoi(it->second);
    } catch (...) {
      throw ConfigError(origin + ": key '" + std::string(key) +
                        "' is not an integer");
    }
    if (v < lo || v > hi)
      throw ConfigError(origin + ": key '" + std::string(key) +
                        "' out of range");
    return v;
  };
  auto getd = [&](const char* key, double def, double lo, double hi) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return def;
    double v = 0.0;
    try {
      v = std::stod(it->second);
    } catch (...) {
      throw ConfigError(origin + ": key '" + std::string(key) +
                        "' is not a number");
    }
    if (v < lo || v > hi)
      throw ConfigError(origin + ": key '" + std::string(key) +
                        "' out of range");
    return v;
  };
  p.n_middle = geti("n_middle", p.n_middle, 2, 512);
  p.n_upper = geti("n_upper", p.n_upper, 0, 64);
  p.n_lower = geti("n_lower", p.n_lower, 0, 64);
  p.overlap = getd("overlap", p.overlap, 0.0, 1.0);
  p.seed = static_cast<std::uint64_t>(
      geti("seed", static_cast<int>(p.seed), 0, 1 << 30));
  p.lexicon_size = geti("lexicon_size", p.lexicon_size, 1, 100000);
  p.n_train = geti("n_train", p.n_train, 0, 1000000);
  p.n_test = geti("n_test", p.n_test, 0, 1000000);
  p.samples_per_char = geti("samples_per_char", p.samples_per_char, 1, 1000);
  p.style.thickness = getd("style.thickness", p.style.thickness, 0.5, 8.0);
  p.style.slant = getd("style.slant", p.style.slant, -30.0, 30.0);
  p.style.jitter = getd("style.jitter", p.style.jitter, 0.0, 3.0);
  p.style.scale_noise = getd("style.scale_noise", p.style.scale_noise, 0.0, 0.5);
  p.style.pepper = getd("style.pepper", p.style.pepper, 0.0, 0.2);
  auto it = cfg.find("out_dir");
  if (it == cfg.end() || it->second.empty())
    throw ConfigError(origin + ": missing out_dir");
  p.out_dir = it->second;

  static const std::set<std::string> known = {
      "n_middle", "n_upper", "n_lower", "overlap", "seed",
      "lexicon_size", "n_train", "n_test", "samples_per_char",
      "style.thickness", "style.slant", "style.jitter", "style.scale_noise",
      "style.pepper", "out_dir"};
  for (const auto& [key, value] : cfg)
    if (!known.count(key))
      throw ConfigError(origin + ": unknown key '" + key + "'");
  return p;
}

SynthOutput run_synth(const SynthParams& params, std::size_t jobs) {
  const SyntheticScript source = random_script(
      "source", params.n_middle, params.n_upper, params.n_lower, params.seed);
  DerivedScript derived = derive_script(source, params.overlap,
                                        params.seed ^ 0xDE12ULL);
  derived.script.id = "target";

  SynthOutput out;
  out.source = emit_script_workspace(
      source, params, (fs::path(params.out_dir) / "source").string(),
      params.seed ^ 0x50ULL, jobs);
  out.target = emit_script_workspace(
      derived.script, params, (fs::path(params.out_dir) / "target").string(),
      params.seed ^ 0x7AULL, jobs);
  out.mapping_file = (fs::path(params.out_dir) / "mapping.tsv").string();
  save_mapping(out.mapping_file, derived.mapping);
  return out;
}

}  // namespace xlhwr
