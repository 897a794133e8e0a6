#include "xlhwr/phog.hpp"

#include <cmath>

#include "doctest.h"
#include "xlhwr/errors.hpp"
#include "xlhwr/rng.hpp"

using namespace xlhwr;

namespace {

void check_level_norms(const PhogVector& v) {
  const int sizes[3] = {8, 32, 128};
  int off = 0;
  for (int level = 0; level < 3; ++level) {
    double sum = 0.0;
    for (int i = 0; i < sizes[level]; ++i) sum += v[off + i];
    const bool normalized = std::abs(sum - 1.0) <= 1e-9 || sum == 0.0;
    CHECK(normalized);
    off += sizes[level];
  }
}

GrayImage random_gray(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage img(w, h);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

}  // namespace

TEST_CASE("phog vectors are 168-dimensional with per-level L1 norms") {
  const GrayImage img = random_gray(20, 30, 11);
  const PhogVector v = phog(img);
  REQUIRE(v.size() == 168);
  check_level_norms(v);
}

TEST_CASE("constant region gives the all-zero vector") {
  GrayImage img(10, 10, 77);
  const PhogVector v = phog(img);
  REQUIRE(v.size() == 168);
  for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("4x4 vertical step edge: hand-computed gradient oracle") {
  // Columns 0,1 dark (0), columns 2,3 bright (255). Clamped central
  // differences put nonzero gradient only at x=1 and x=2, pointing along
  // +x, so every vote lands in orientation bin 0.
  GrayImage img(4, 4, 0);
  for (int y = 0; y < 4; ++y)
    for (int x = 2; x < 4; ++x) img.at(x, y) = 255;
  const PhogVector v = phog(img);
  REQUIRE(v.size() == 168);

  // Level 0: all mass in bin 0.
  CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (int b = 1; b < 8; ++b) CHECK(v[b] == 0.0);

  // Level 1 (2x2 cells): each cell holds two gradient pixels of equal
  // magnitude -> 0.25 in bin 0 of every cell.
  for (int cell = 0; cell < 4; ++cell) {
    CHECK(v[8 + cell * 8] == doctest::Approx(0.25).epsilon(1e-12));
    for (int b = 1; b < 8; ++b) CHECK(v[8 + cell * 8 + b] == 0.0);
  }

  // Level 2 (4x4 cells, one pixel each): the eight x=1 / x=2 pixels carry
  // 0.125 each in bin 0.
  for (int cy = 0; cy < 4; ++cy) {
    for (int cx = 0; cx < 4; ++cx) {
      const int base = 40 + (cy * 4 + cx) * 8;
      const double expect = (cx == 1 || cx == 2) ? 0.125 : 0.0;
      CHECK(v[base] == doctest::Approx(expect).epsilon(1e-12));
      for (int b = 1; b < 8; ++b) CHECK(v[base + b] == 0.0);
    }
  }
}

TEST_CASE("phog is invariant to a constant intensity offset") {
  const GrayImage img = random_gray(12, 12, 3);
  GrayImage shifted = img;
  for (auto& p : shifted.data)
    p = static_cast<std::uint8_t>(std::min(255, p / 2 + 40));
  GrayImage base = img;
  for (auto& p : base.data) p = static_cast<std::uint8_t>(p / 2);
  const PhogVector a = phog(base);
  const PhogVector b = phog(shifted);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("phog rejects an empty region") {
  GrayImage empty;
  CHECK_THROWS_AS(phog(empty), DataError);
}

TEST_CASE("window_features frame count arithmetic") {
  BinaryImage img(32, 10);
  for (int x = 0; x < 32; x += 2) img.at(x, 5) = 1;
  const FeatureSequence seq = window_features(img, 8, 3);
  CHECK(seq.frames.size() == 9);  // floor((32-8)/3)+1
  CHECK(seq.window_width == 8);
  CHECK(seq.window_shift == 3);
  for (const auto& f : seq.frames) CHECK(f.size() == 168);
}

TEST_CASE("narrow image yields one right-padded frame") {
  BinaryImage img(6, 10);
  img.at(1, 3) = 1;
  const FeatureSequence seq = window_features(img, 8, 3);
  CHECK(seq.frames.size() == 1);
}

TEST_CASE("translating content by one shift moves frames by one index") {
  Rng rng(5);
  BinaryImage img(44, 12);
  for (auto& v : img.data) v = rng.uniform() < 0.25 ? 1 : 0;
  const int shift = 3;
  BinaryImage moved(44 + shift, 12);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 44; ++x)
      if (img.at(x, y)) moved.at(x + shift, y) = 1;

  const FeatureSequence a = window_features(img, 8, shift);
  const FeatureSequence b = window_features(moved, 8, shift);
  REQUIRE(b.frames.size() == a.frames.size() + 1);
  for (std::size_t i = 0; i < a.frames.size(); ++i)
    for (std::size_t d = 0; d < 168; ++d)
      CHECK(a.frames[i][d] == doctest::Approx(b.frames[i + 1][d]).epsilon(1e-12));
}

TEST_CASE("modifier_features: 150x150 resize is identity at target size") {
  Component comp;
  Rng rng(9);
  for (int y = 0; y < 150; ++y)
    for (int x = 0; x < 150; ++x)
      if (rng.uniform() < 0.2) comp.pixels.push_back({x, y});
  comp.x0 = 0;
  comp.y0 = 0;
  comp.x1 = 149;
  comp.y1 = 149;
  const PhogVector direct = phog([&] {
    GrayImage g(150, 150);
    for (const auto& p : comp.pixels) g.at(p.x, p.y) = 255;
    return g;
  }());
  const PhogVector via = modifier_features(comp);
  REQUIRE(via.size() == 168);
  for (std::size_t i = 0; i < via.size(); ++i)
    CHECK(via[i] == doctest::Approx(direct[i]).epsilon(1e-12));
}

TEST_CASE("modifier_features is invariant to 2x uniform scaling") {
  Component small;
  Rng rng(13);
  BinaryImage shape(40, 40);
  for (int y = 8; y < 32; ++y)
    for (int x = 8; x < 32; ++x)
      if (rng.uniform() < 0.3) shape.at(x, y) = 1;
  auto tighten = [](Component& c) {
    c.x0 = c.y0 = 1 << 20;
    c.x1 = c.y1 = -1;
    for (const auto& p : c.pixels) {
      c.x0 = std::min(c.x0, p.x);
      c.x1 = std::max(c.x1, p.x);
      c.y0 = std::min(c.y0, p.y);
      c.y1 = std::max(c.y1, p.y);
    }
  };
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x)
      if (shape.at(x, y)) small.pixels.push_back({x, y});
  REQUIRE(!small.pixels.empty());
  tighten(small);

  Component big;
  for (int y = 0; y < 80; ++y)
    for (int x = 0; x < 80; ++x)
      if (shape.at(x / 2, y / 2)) big.pixels.push_back({x, y});
  tighten(big);

  const PhogVector a = modifier_features(small);
  const PhogVector b = modifier_features(big);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-6));
}

TEST_CASE("modifier_features rejects an empty component") {
  Component empty;
  CHECK_THROWS_AS(modifier_features(empty), DataError);
}
