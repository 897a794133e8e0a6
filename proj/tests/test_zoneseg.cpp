#include "xlhwr/zoneseg.hpp"

#include <filesystem>

#include "doctest.h"
#include "xlhwr/errors.hpp"
#include "xlhwr/formats.hpp"
#include "xlhwr/synthscript.hpp"

using namespace xlhwr;

namespace {

GrayImage to_gray(const BinaryImage& bin) {
  GrayImage img(bin.width, bin.height, 255);
  for (std::size_t i = 0; i < bin.data.size(); ++i)
    if (bin.data[i]) img.data[i] = 0;
  return img;
}

std::vector<LowerTemplate> script_templates(const SyntheticScript& s) {
  std::vector<LowerTemplate> out;
  RenderStyle clean;
  clean.jitter = 0.0;
  clean.scale_noise = 0.0;
  for (const auto& g : s.lower) {
    const GrayImage img = render_modifier_sample(s, Zone::kLower, g.id, clean, 0);
    const BinaryImage bin = binarize(img);
    const auto comps = connected_components(bin);
    REQUIRE(!comps.empty());
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

}  // namespace

TEST_CASE("detect_matra: full-width line at row 5 gives the exact band") {
  BinaryImage bin(40, 20);
  for (int x = 0; x < 40; ++x) bin.at(x, 5) = 1;
  const MatraBand band = detect_matra(bin);
  CHECK(band.top == 5);
  CHECK(band.bottom == 5);
}

TEST_CASE("detect_matra grows the band over >= 70% rows") {
  BinaryImage bin(40, 20);
  for (int x = 0; x < 40; ++x) bin.at(x, 6) = 1;   // peak
  for (int x = 0; x < 30; ++x) bin.at(x, 5) = 1;   // 75% of peak
  for (int x = 0; x < 20; ++x) bin.at(x, 7) = 1;   // 50%, excluded
  const MatraBand band = detect_matra(bin);
  CHECK(band.top == 5);
  CHECK(band.bottom == 6);
}

TEST_CASE("detect_matra rejects blank input") {
  BinaryImage blank(10, 10);
  CHECK_THROWS_AS(detect_matra(blank), DataError);
}

TEST_CASE("detect_matra lands within 2 rows of render ground truth") {
  const SyntheticScript s = random_script("s", 8, 2, 2, 41);
  RenderStyle style;
  const auto lexicon_bases = s.base_chars();
  int within = 0, total = 0;
  for (int i = 0; i < 30; ++i) {
    const Word word{lexicon_bases[i % 8], lexicon_bases[(i + 3) % 8],
                    lexicon_bases[(i + 5) % 8]};
    const RenderedWord r = render_word(s, word, style, 100 + i);
    const MatraBand band = detect_matra(binarize(r.image));
    if (std::abs(band.top - r.truth.matra_top) <= 2 &&
        std::abs(band.bottom - r.truth.matra_bottom) <= 2)
      ++within;
    ++total;
  }
  CHECK(within == total);
}

TEST_CASE("extract_upper: none, two, and matra-touching modifiers") {
  const SyntheticScript s = random_script("s", 6, 2, 0, 43);
  RenderStyle style;
  style.jitter = 0.5;
  const auto bases = s.base_chars();

  // Modifier-free word.
  const RenderedWord bare = render_word(s, {bases[0], bases[1]}, style, 1);
  const BinaryImage bare_bin = binarize(bare.image);
  CHECK(extract_upper(bare_bin, detect_matra(bare_bin)).empty());

  // Two upper modifiers; both touch the matra by construction.
  std::vector<std::string> with_upper;
  for (const auto& [ch, d] : s.decomposition)
    if (d.upper) with_upper.push_back(ch);
  REQUIRE(with_upper.size() >= 2);
  const RenderedWord two =
      render_word(s, {with_upper[0], bases[1], with_upper[3]}, style, 2);
  const BinaryImage two_bin = binarize(two.image);
  const MatraBand band = detect_matra(two_bin);
  const auto uppers = extract_upper(two_bin, band);
  REQUIRE(uppers.size() == 2);
  REQUIRE(two.truth.modifiers.size() == 2);
  // Each extracted x-range intersects a ground-truth modifier range, and
  // every pixel lies above the band.
  for (const auto& zc : uppers) {
    bool intersects = false;
    for (const auto& m : two.truth.modifiers)
      if (zc.x1 >= m.x0 && zc.x0 <= m.x1) intersects = true;
    CHECK(intersects);
    for (const auto& p : zc.component.pixels) CHECK(p.y < band.top);
  }
}

TEST_CASE("extract_lower: match splits, mismatch stays") {
  const SyntheticScript s = random_script("s", 6, 0, 2, 47);
  RenderStyle style;
  style.jitter = 0.5;
  const auto templates = script_templates(s);
  const auto bases = s.base_chars();

  std::string with_lower;
  for (const auto& [ch, d] : s.decomposition)
    if (d.lower) {
      with_lower = ch;
      break;
    }
  const RenderedWord r = render_word(s, {bases[0], with_lower}, style, 3);
  const BinaryImage bin = binarize(r.image);
  const MatraBand band = detect_matra(bin);

  const auto lowers = extract_lower(bin, band, templates);
  REQUIRE(lowers.size() == 1);
  REQUIRE(r.truth.modifiers.size() == 1);
  CHECK(lowers[0].x1 >= r.truth.modifiers[0].x0);
  CHECK(lowers[0].x0 <= r.truth.modifiers[0].x1);

  // No descenders -> nothing extracted.
  const RenderedWord bare = render_word(s, {bases[0], bases[1]}, style, 4);
  const BinaryImage bare_bin = binarize(bare.image);
  CHECK(extract_lower(bare_bin, detect_matra(bare_bin), templates).empty());

  // Mismatched shape below the baseline stays put: correlate against
  // templates unlike anything rendered.
  std::vector<LowerTemplate> wrong;
  BinaryImage bar(20, 3);
  for (int x = 0; x < 20; ++x)
    for (int y = 0; y < 3; ++y) bar.at(x, y) = 1;
  wrong.push_back({"bar", bar});
  const auto none = extract_lower(bin, band, wrong);
  CHECK(none.empty());
}

TEST_CASE("split_zones: modifier-free word has empty upper/lower lists") {
  const SyntheticScript s = random_script("s", 5, 2, 2, 53);
  RenderStyle style;
  const auto bases = s.base_chars();
  const RenderedWord r = render_word(s, {bases[0], bases[2]}, style, 5);
  const ZoneSplit split = split_zones(r.image, script_templates(s));
  CHECK(split.upper.empty());
  CHECK(split.lower.empty());
  CHECK(split.middle.ink_count() > 0);
  CHECK(split.matra.top <= split.matra.bottom);
  CHECK(split.matra.bottom < split.middle_row0);
}

TEST_CASE("split_zones conserves ink exactly") {
  const SyntheticScript s = random_script("s", 6, 2, 2, 59);
  RenderStyle style;
  style.pepper = 0.002;
  std::vector<std::string> composites;
  for (const auto& [ch, d] : s.decomposition) composites.push_back(ch);
  const auto templates = script_templates(s);
  for (int i = 0; i < 10; ++i) {
    const Word word{composites[(i * 7) % composites.size()],
                    composites[(i * 13 + 5) % composites.size()],
                    composites[(i * 29 + 11) % composites.size()]};
    const RenderedWord r = render_word(s, word, style, 600 + i);
    const BinaryImage bin = binarize(r.image);
    const ZoneSplit split = split_zones(r.image, templates);

    std::size_t band_ink = 0;
    for (int y = split.matra.top; y <= split.matra.bottom; ++y)
      for (int x = 0; x < bin.width; ++x) band_ink += bin.at(x, y);
    std::size_t upper_ink = 0;
    for (const auto& zc : split.upper) upper_ink += zc.component.pixels.size();
    std::size_t lower_ink = 0;
    for (const auto& zc : split.lower) lower_ink += zc.component.pixels.size();
    CHECK(split.middle.ink_count() + band_ink + upper_ink + lower_ink ==
          bin.ink_count());
  }
}

TEST_CASE("split_zones is deterministic and errors on blank images") {
  const SyntheticScript s = random_script("s", 4, 1, 1, 61);
  RenderStyle style;
  const RenderedWord r = render_word(s, {s.base_chars()[0]}, style, 6);
  const auto templates = script_templates(s);
  const ZoneSplit a = split_zones(r.image, templates);
  const ZoneSplit b = split_zones(r.image, templates);
  CHECK(a.middle.data == b.middle.data);
  CHECK(a.matra.top == b.matra.top);

  GrayImage blank(30, 30, 255);
  CHECK_THROWS_AS(split_zones(blank, templates), DataError);
}

TEST_CASE("load_templates reads labeled PGM files from a directory") {
  const SyntheticScript s = random_script("s", 3, 0, 2, 67);
  const auto dir =
      std::filesystem::temp_directory_path() / "xlhwr_templates_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  RenderStyle clean;
  clean.jitter = 0.0;
  clean.scale_noise = 0.0;
  for (const auto& g : s.lower)
    save_pgm(render_modifier_sample(s, Zone::kLower, g.id, clean, 0),
             (dir / (g.id + ".pgm")).string());
  const auto templates = load_templates(dir.string());
  REQUIRE(templates.size() == 2);
  CHECK(templates[0].label == "l0");
  CHECK(templates[1].label == "l1");
  CHECK(templates[0].shape.ink_count() > 0);
}
