#include "xlhwr/synthscript.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "xlhwr/errors.hpp"
#include "xlhwr/formats.hpp"
#include "xlhwr/parallel.hpp"
#include "xlhwr/rng.hpp"

namespace xlhwr {

const char* zone_name(Zone z) {
  switch (z) {
    case Zone::kMiddle: return "middle";
    case Zone::kUpper: return "upper";
    case Zone::kLower: return "lower";
  }
  return "middle";
}

Zone zone_from_name(const std::string& name) {
  if (name == "middle") return Zone::kMiddle;
  if (name == "upper") return Zone::kUpper;
  if (name == "lower") return Zone::kLower;
  throw ConfigError("unknown zone '" + name + "'");
}

const GlyphDef* SyntheticScript::find_glyph(Zone zone,
                                            const std::string& id) const {
  const std::vector<GlyphDef>* pool = &middle;
  if (zone == Zone::kUpper) pool = &upper;
  if (zone == Zone::kLower) pool = &lower;
  for (const auto& g : *pool)
    if (g.id == id) return &g;
  return nullptr;
}

std::vector<std::string> SyntheticScript::base_chars() const {
  std::vector<std::string> out;
  out.reserve(middle.size());
  for (const auto& g : middle) out.push_back(g.id);
  return out;
}

std::vector<std::string> SyntheticScript::composite_chars() const {
  std::vector<std::string> out;
  out.reserve(decomposition.size());
  for (const auto& [c, d] : decomposition) out.push_back(c);
  return out;
}

namespace {

std::string codepoint_utf8(std::uint32_t cp) {
  std::string s;
  if (cp < 0x80) {
    s += static_cast<char>(cp);
  } else if (cp < 0x800) {
    s += static_cast<char>(0xC0 | (cp >> 6));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    s += static_cast<char>(0xE0 | (cp >> 12));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    s += static_cast<char>(0xF0 | (cp >> 18));
    s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return s;
}

// Composite character ids are consecutive codepoints from the CJK block:
// index c -> U+4E00+c. The first n_middle composites are the bare bases.
constexpr std::uint32_t kCharBlockStart = 0x4E00;

// Resamples a stroke set to a fixed point cloud for distance computation.
std::vector<StrokePoint> sample_strokes(const std::vector<Stroke>& strokes,
                                        int per_stroke = 12) {
  std::vector<StrokePoint> pts;
  for (const auto& s : strokes) {
    if (s.size() == 1) {
      pts.push_back(s[0]);
      continue;
    }
    double total = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i)
      total += std::hypot(s[i].x - s[i - 1].x, s[i].y - s[i - 1].y);
    if (total <= 0.0) {
      pts.push_back(s[0]);
      continue;
    }
    for (int k = 0; k < per_stroke; ++k) {
      double want = total * k / (per_stroke - 1);
      double acc = 0.0;
      StrokePoint p = s.back();
      for (std::size_t i = 1; i < s.size(); ++i) {
        const double seg =
            std::hypot(s[i].x - s[i - 1].x, s[i].y - s[i - 1].y);
        if (acc + seg >= want && seg > 0.0) {
          const double t = (want - acc) / seg;
          p = {s[i - 1].x + t * (s[i].x - s[i - 1].x),
               s[i - 1].y + t * (s[i].y - s[i - 1].y)};
          break;
        }
        acc += seg;
      }
      pts.push_back(p);
    }
  }
  return pts;
}

// Symmetric mean nearest-point (chamfer) distance between stroke sets.
double glyph_distance(const std::vector<Stroke>& a,
                      const std::vector<Stroke>& b) {
  const auto pa = sample_strokes(a);
  const auto pb = sample_strokes(b);
  if (pa.empty() || pb.empty()) return 1.0;
  auto one_way = [](const std::vector<StrokePoint>& from,
                    const std::vector<StrokePoint>& to) {
    double sum = 0.0;
    for (const auto& p : from) {
      double best = 1e9;
      for (const auto& q : to) {
        const double d = std::hypot(p.x - q.x, p.y - q.y);
        best = std::min(best, d);
      }
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  return 0.5 * (one_way(pa, pb) + one_way(pb, pa));
}

std::vector<Stroke> random_strokes(Rng& rng, int min_strokes, int max_strokes,
                                   int min_pts, int max_pts) {
  const int ns = min_strokes +
                 static_cast<int>(rng.below(max_strokes - min_strokes + 1));
  std::vector<Stroke> strokes(ns);
  for (auto& s : strokes) {
    const int np =
        min_pts + static_cast<int>(rng.below(max_pts - min_pts + 1));
    s.resize(np);
    for (auto& p : s) {
      p.x = rng.uniform(0.05, 0.95);
      p.y = rng.uniform(0.05, 0.95);
    }
  }
  return strokes;
}

// Minimum chamfer separation between glyph classes of one pool. Generation
// relaxes the margin slowly if rejection keeps failing, so it always
// terminates; at desk-scale pool sizes the first margin nearly always holds.
constexpr double kSeparationMargin = 0.22;

std::vector<Stroke> separated_strokes(
    Rng& rng, const std::vector<const std::vector<Stroke>*>& existing,
    bool modifier) {
  double margin = kSeparationMargin;
  for (int attempt = 1;; ++attempt) {
    // Modifiers stay single-polyline so they rasterize as one component.
    auto cand = modifier ? random_strokes(rng, 1, 1, 4, 5)
                         : random_strokes(rng, 2, 4, 3, 5);
    bool ok = true;
    for (const auto* e : existing) {
      if (glyph_distance(cand, *e) < margin) {
        ok = false;
        break;
      }
    }
    if (ok) return cand;
    if (attempt % 64 == 0) margin *= 0.9;
  }
}

void jitter_strokes(std::vector<Stroke>& strokes, Rng& rng, double amount) {
  for (auto& s : strokes)
    for (auto& p : s) {
      p.x = std::clamp(p.x + rng.uniform(-amount, amount), 0.0, 1.0);
      p.y = std::clamp(p.y + rng.uniform(-amount, amount), 0.0, 1.0);
    }
}

void build_decomposition(SyntheticScript& script) {
  script.decomposition.clear();
  const int nu = static_cast<int>(script.upper.size());
  const int nl = static_cast<int>(script.lower.size());
  const int per_base = 1 + nu + nl;
  for (std::size_t b = 0; b < script.middle.size(); ++b) {
    const std::uint32_t first =
        kCharBlockStart + static_cast<std::uint32_t>(b * per_base);
    const std::string& base_id = script.middle[b].id;
    script.decomposition[codepoint_utf8(first)] = Decomp{base_id, {}, {}};
    for (int u = 0; u < nu; ++u)
      script.decomposition[codepoint_utf8(first + 1 + u)] =
          Decomp{base_id, script.upper[u].id, {}};
    for (int l = 0; l < nl; ++l)
      script.decomposition[codepoint_utf8(first + 1 + nu + l)] =
          Decomp{base_id, {}, script.lower[l].id};
  }
}

}  // namespace

SyntheticScript random_script(const std::string& script_id, int n_middle,
                              int n_upper, int n_lower, std::uint64_t seed) {
  if (n_middle < 2) throw ConfigError("random_script: n_middle must be >= 2");
  if (n_upper < 0 || n_lower < 0)
    throw ConfigError("random_script: negative modifier count");

  Rng rng(seed);
  SyntheticScript script;
  script.id = script_id;
  script.has_matra = true;

  const int per_base = 1 + n_upper + n_lower;
  script.middle.reserve(n_middle);
  script.upper.reserve(n_upper);
  script.lower.reserve(n_lower);
  std::vector<const std::vector<Stroke>*> pool;
  for (int i = 0; i < n_middle; ++i) {
    GlyphDef g;
    g.zone = Zone::kMiddle;
    g.id = codepoint_utf8(kCharBlockStart +
                          static_cast<std::uint32_t>(i * per_base));
    g.strokes = separated_strokes(rng, pool, false);
    script.middle.push_back(std::move(g));
    pool.push_back(&script.middle.back().strokes);
  }
  pool.clear();
  for (int i = 0; i < n_upper; ++i) {
    GlyphDef g;
    g.zone = Zone::kUpper;
    g.id = "u" + std::to_string(i);
    g.strokes = separated_strokes(rng, pool, true);
    script.upper.push_back(std::move(g));
    pool.push_back(&script.upper.back().strokes);
  }
  pool.clear();
  for (int i = 0; i < n_lower; ++i) {
    GlyphDef g;
    g.zone = Zone::kLower;
    g.id = "l" + std::to_string(i);
    g.strokes = separated_strokes(rng, pool, true);
    script.lower.push_back(std::move(g));
    pool.push_back(&script.lower.back().strokes);
  }
  build_decomposition(script);
  return script;
}

namespace {

// Copies ceil(rho*n) glyphs from `src` (index choice and placement both by
// seeded shuffle), fills the rest with fresh glyphs separated from both the
// source pool and the new pool, and records target->source id pairs.
std::vector<GlyphDef> derive_pool(const std::vector<GlyphDef>& src,
                                  double rho, bool modifier,
                                  const std::string& id_prefix, int per_base,
                                  Rng& rng,
                                  std::map<std::string, std::string>* mapping) {
  const int n = static_cast<int>(src.size());
  if (n == 0) return {};
  const int n_shared = static_cast<int>(std::ceil(rho * n - 1e-12));

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i + 1))]);

  // order[0..n_shared) are the source glyphs that get copied; their target
  // positions are a second shuffle.
  std::vector<int> slot(n);
  for (int i = 0; i < n; ++i) slot[i] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(slot[i], slot[rng.below(static_cast<std::uint64_t>(i + 1))]);

  std::vector<GlyphDef> out(n);
  std::vector<bool> filled(n, false);
  std::vector<const std::vector<Stroke>*> avoid;
  for (const auto& g : src) avoid.push_back(&g.strokes);

  auto slot_id = [&](int s) {
    if (!modifier)
      return codepoint_utf8(kCharBlockStart +
                            static_cast<std::uint32_t>(s * per_base));
    return id_prefix + std::to_string(s);
  };

  for (int k = 0; k < n_shared; ++k) {
    const int s = slot[k];
    GlyphDef g = src[order[k]];
    g.id = slot_id(s);
    jitter_strokes(g.strokes, rng, 0.015);
    if (mapping) (*mapping)[g.id] = src[order[k]].id;
    out[s] = std::move(g);
    filled[s] = true;
    avoid.push_back(&out[s].strokes);
  }
  for (int s = 0; s < n; ++s) {
    if (filled[s]) continue;
    GlyphDef g;
    g.zone = src[0].zone;
    g.id = slot_id(s);
    g.strokes = separated_strokes(rng, avoid, modifier);
    out[s] = std::move(g);
    avoid.push_back(&out[s].strokes);
  }
  return out;
}

}  // namespace

DerivedScript derive_script(const SyntheticScript& base, double overlap,
                            std::uint64_t seed) {
  if (overlap < 0.0 || overlap > 1.0)
    throw ConfigError("derive_script: overlap must be in [0,1]");

  Rng rng(seed);
  DerivedScript out;
  out.script.id = base.id + "-derived";
  out.script.has_matra = base.has_matra;
  const int per_base =
      1 + static_cast<int>(base.upper.size() + base.lower.size());
  out.script.middle = derive_pool(base.middle, overlap, false, "",
                                  per_base, rng, &out.mapping);
  out.script.upper =
      derive_pool(base.upper, overlap, true, "u", per_base, rng, &out.mapping);
  out.script.lower =
      derive_pool(base.lower, overlap, true, "l", per_base, rng, &out.mapping);
  build_decomposition(out.script);
  return out;
}

namespace {

struct Brush {
  double radius;
};

void stamp(BinaryImage& img, double cx, double cy, const Brush& b,
           std::vector<Pixel>* drawn) {
  const int r = static_cast<int>(std::ceil(b.radius));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy > b.radius * b.radius + 1e-9) continue;
      const int x = static_cast<int>(std::lround(cx)) + dx;
      const int y = static_cast<int>(std::lround(cy)) + dy;
      if (x < 0 || x >= img.width || y < 0 || y >= img.height) continue;
      if (!img.at(x, y)) {
        img.at(x, y) = 1;
        if (drawn) drawn->push_back({x, y});
      }
    }
  }
}

void draw_segment(BinaryImage& img, StrokePoint p, StrokePoint q,
                  const Brush& b, std::vector<Pixel>* drawn) {
  const double len = std::hypot(q.x - p.x, q.y - p.y);
  const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    stamp(img, p.x + t * (q.x - p.x), p.y + t * (q.y - p.y), b, drawn);
  }
}

// Draws a glyph into the pixel box [x0,x1]x[y0,y1] with jitter, per-glyph
// scale and slant shear about the matra row; returns the pixels it added.
std::vector<Pixel> draw_glyph(BinaryImage& img, const GlyphDef& glyph,
                              double x0, double y0, double x1, double y1,
                              const RenderStyle& style, Rng& rng) {
  std::vector<Pixel> drawn;
  const Brush brush{std::max(0.5, style.thickness / 2.0)};
  const double scale =
      std::clamp(1.0 + style.scale_noise * rng.uniform(-1.0, 1.0), 0.5, 1.4);
  const double cx = (x0 + x1) / 2.0, cy = (y0 + y1) / 2.0;
  const double shear = std::tan(style.slant * std::numbers::pi / 180.0);

  for (const auto& stroke : glyph.strokes) {
    Stroke mapped;
    mapped.reserve(stroke.size());
    for (const auto& p : stroke) {
      double px = x0 + p.x * (x1 - x0);
      double py = y0 + p.y * (y1 - y0);
      px = cx + (px - cx) * scale;
      py = cy + (py - cy) * scale;
      px += rng.uniform(-style.jitter, style.jitter);
      py += rng.uniform(-style.jitter, style.jitter);
      px += shear * (static_cast<double>(kMatraBottom) - py);
      mapped.push_back({px, py});
    }
    for (std::size_t i = 1; i < mapped.size(); ++i)
      draw_segment(img, mapped[i - 1], mapped[i], brush, &drawn);
    if (mapped.size() == 1) stamp(img, mapped[0].x, mapped[0].y, brush, &drawn);
  }
  return drawn;
}

struct XRange {
  int x0 = 0, x1 = -1;
  void add(int x) {
    if (x1 < x0) {
      x0 = x1 = x;
    } else {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
    }
  }
  bool empty() const { return x1 < x0; }
};

}  // namespace

RenderedWord render_word(const SyntheticScript& script, const Word& word,
                         const RenderStyle& style, std::uint64_t seed) {
  if (word.empty()) throw DataError("render_word: empty word");
  std::vector<const Decomp*> decomps;
  decomps.reserve(word.size());
  for (const auto& c : word) {
    auto it = script.decomposition.find(c);
    if (it == script.decomposition.end())
      throw CoverageError("render_word: unknown character '" + c + "'");
    decomps.push_back(&it->second);
  }

  Rng rng(seed);
  const int n = static_cast<int>(word.size());
  const int width = 2 * kCanvasMargin + n * kCharCellWidth;
  BinaryImage canvas(width, kCanvasHeight);

  RenderedWord out;
  out.truth.transcription = word;
  out.truth.matra_top = kMatraTop;
  out.truth.matra_bottom = kMatraBottom;

  // Matra bar across the base extent.
  if (script.has_matra) {
    for (int y = kMatraTop; y <= kMatraBottom; ++y)
      for (int x = kCanvasMargin; x < width - kCanvasMargin; ++x)
        canvas.at(x, y) = 1;
  }

  for (int i = 0; i < n; ++i) {
    const Decomp& d = *decomps[i];
    const int cell_x0 = kCanvasMargin + i * kCharCellWidth;
    const int cell_x1 = cell_x0 + kCharCellWidth - 1;

    const GlyphDef* base = script.find_glyph(Zone::kMiddle, d.base);
    if (!base)
      throw CoverageError("render_word: decomposition references missing base '" +
                          d.base + "'");
    auto base_px =
        draw_glyph(canvas, *base, cell_x0 + 2, kMatraBottom + 3, cell_x1 - 2,
                   kCanvasHeight - 19, style, rng);

    // Connect the base to the matra so words form one cursive body.
    if (script.has_matra && !base_px.empty()) {
      Pixel top = base_px[0];
      for (const auto& p : base_px)
        if (p.y < top.y || (p.y == top.y && p.x < top.x)) top = p;
      const Brush brush{std::max(0.5, style.thickness / 2.0)};
      draw_segment(canvas, {static_cast<double>(top.x), static_cast<double>(top.y)},
                   {static_cast<double>(top.x), static_cast<double>(kMatraBottom)},
                   brush, &base_px);
    }

    XRange cr;
    for (const auto& p : base_px)
      if (p.y > kMatraBottom) cr.add(std::clamp(p.x, cell_x0, cell_x1));
    if (cr.empty()) cr.add((cell_x0 + cell_x1) / 2);
    out.truth.char_x.push_back({cr.x0, cr.x1});

    if (d.upper) {
      const GlyphDef* g = script.find_glyph(Zone::kUpper, *d.upper);
      if (!g)
        throw CoverageError("render_word: missing upper modifier '" + *d.upper +
                            "'");
      auto px = draw_glyph(canvas, *g, cell_x0 + 5, 2, cell_x1 - 5,
                           kMatraTop - 2, style, rng);
      if (script.has_matra && !px.empty()) {
        Pixel bot = px[0];
        for (const auto& p : px)
          if (p.y > bot.y || (p.y == bot.y && p.x < bot.x)) bot = p;
        const Brush brush{std::max(0.5, style.thickness / 2.0)};
        draw_segment(canvas,
                     {static_cast<double>(bot.x), static_cast<double>(bot.y)},
                     {static_cast<double>(bot.x), static_cast<double>(kMatraTop)},
                     brush, &px);
      }
      XRange mr;
      for (const auto& p : px)
        if (p.y < kMatraTop) mr.add(std::clamp(p.x, cell_x0, cell_x1));
      if (mr.empty()) mr.add((cell_x0 + cell_x1) / 2);
      out.truth.modifiers.push_back(
          {Zone::kUpper, *d.upper, mr.x0, mr.x1, i});
    }
    if (d.lower) {
      const GlyphDef* g = script.find_glyph(Zone::kLower, *d.lower);
      if (!g)
        throw CoverageError("render_word: missing lower modifier '" + *d.lower +
                            "'");
      auto px = draw_glyph(canvas, *g, cell_x0 + 3, kCanvasHeight - 15,
                           cell_x1 - 3, kCanvasHeight - 2, style, rng);
      XRange mr;
      for (const auto& p : px) mr.add(std::clamp(p.x, cell_x0, cell_x1));
      if (mr.empty()) mr.add((cell_x0 + cell_x1) / 2);
      out.truth.modifiers.push_back(
          {Zone::kLower, *d.lower, mr.x0, mr.x1, i});
    }
  }

  // Pepper specks on the background.
  if (style.pepper > 0.0) {
    const auto total = static_cast<std::uint64_t>(canvas.data.size());
    const auto specks = static_cast<std::uint64_t>(
        std::llround(style.pepper * static_cast<double>(total)));
    for (std::uint64_t k = 0; k < specks; ++k)
      canvas.data[rng.below(total)] = 1;
  }

  out.image = GrayImage(width, kCanvasHeight, 255);
  for (std::size_t i = 0; i < canvas.data.size(); ++i)
    if (canvas.data[i]) out.image.data[i] = 0;
  return out;
}

GrayImage render_modifier_sample(const SyntheticScript& script, Zone zone,
                                 const std::string& label,
                                 const RenderStyle& style, std::uint64_t seed) {
  const GlyphDef* g = script.find_glyph(zone, label);
  if (!g)
    throw CoverageError("render_modifier_sample: unknown glyph '" + label +
                        "' in zone " + zone_name(zone));
  Rng rng(seed);
  BinaryImage canvas(32, 32);
  // Box proportions track the in-word modifier boxes, so templates and
  // extracted components correlate at similar stroke scales.
  if (zone == Zone::kLower)
    draw_glyph(canvas, *g, 5, 8, 26, 24, style, rng);
  else
    draw_glyph(canvas, *g, 5, 5, 26, 26, style, rng);
  GrayImage img(32, 32, 255);
  for (std::size_t i = 0; i < canvas.data.size(); ++i)
    if (canvas.data[i]) img.data[i] = 0;
  return img;
}

std::string gen_dataset(const SyntheticScript& script,
                        const std::vector<Word>& lexicon, int n_images,
                        const RenderStyle& style, std::uint64_t seed,
                        const std::string& out_dir, std::size_t jobs) {
  if (lexicon.empty()) throw DataError("gen_dataset: empty lexicon");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec && !fs::is_directory(out_dir))
    throw IoError("gen_dataset: cannot create directory " + out_dir);

  std::vector<ManifestRow> rows(static_cast<std::size_t>(std::max(n_images, 0)));
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const std::uint64_t image_seed = seed ^ static_cast<std::uint64_t>(i);
    Rng pick(image_seed);
    const Word& word = lexicon[pick.below(lexicon.size())];
    const auto rendered =
        render_word(script, word, style, image_seed ^ 0xD1B54A32D192ED03ULL);
    char name[32];
    std::snprintf(name, sizeof(name), "img_%05zu", i);
    const std::string img_rel = std::string(name) + ".pgm";
    const std::string gt_rel = std::string(name) + ".gt";
    save_pgm(rendered.image, (fs::path(out_dir) / img_rel).string());
    save_ground_truth((fs::path(out_dir) / gt_rel).string(), rendered.truth);
    rows[i] = ManifestRow{img_rel, join_word(word), gt_rel};
  });

  const std::string manifest_path = (fs::path(out_dir) / "manifest.tsv").string();
  save_manifest(manifest_path, script.id, rows);
  return manifest_path;
}

}  // namespace xlhwr
