#include "xlhwr/raster.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "xlhwr/errors.hpp"
#include "xlhwr/rng.hpp"

using namespace xlhwr;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

BinaryImage random_binary(int w, int h, double density, std::uint64_t seed) {
  Rng rng(seed);
  BinaryImage bin(w, h);
  for (auto& v : bin.data) v = rng.uniform() < density ? 1 : 0;
  return bin;
}

// Independent 4/8-neighbour flood fill used as the labeling oracle.
std::vector<std::vector<int>> flood_fill_labels(const BinaryImage& bin) {
  std::vector<std::vector<int>> label(bin.height,
                                      std::vector<int>(bin.width, -1));
  int next = 0;
  for (int y = 0; y < bin.height; ++y) {
    for (int x = 0; x < bin.width; ++x) {
      if (!bin.at(x, y) || label[y][x] >= 0) continue;
      std::vector<std::pair<int, int>> frontier{{x, y}};
      label[y][x] = next;
      while (!frontier.empty()) {
        auto [cx, cy] = frontier.back();
        frontier.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= bin.width || ny >= bin.height)
              continue;
            if (bin.at(nx, ny) && label[ny][nx] < 0) {
              label[ny][nx] = next;
              frontier.emplace_back(nx, ny);
            }
          }
      }
      ++next;
    }
  }
  return label;
}

}  // namespace

TEST_CASE("load_pgm decodes a literal P2 file") {
  const std::string path = temp_path("xlhwr_p2.pgm");
  write_file(path, "P2\n2 2\n255\n0 255 128 64\n");
  const GrayImage img = load_pgm(path);
  CHECK(img.width == 2);
  CHECK(img.height == 2);
  CHECK(img.data == std::vector<std::uint8_t>{0, 255, 128, 64});
}

TEST_CASE("save_pgm canonical emit round-trips byte-for-byte") {
  GrayImage img(3, 2);
  img.data = {10, 20, 30, 40, 50, 60};
  const std::string a = temp_path("xlhwr_rt_a.pgm");
  const std::string b = temp_path("xlhwr_rt_b.pgm");
  save_pgm(img, a);
  save_pgm(load_pgm(a), b);
  CHECK(read_file(a) == read_file(b));
  // And a canonical file re-emits itself.
  const GrayImage again = load_pgm(b);
  CHECK(again.data == img.data);
}

TEST_CASE("load_pgm reports the byte offset of a truncated payload") {
  const std::string path = temp_path("xlhwr_trunc.pgm");
  const std::string header = "P5\n2 2\n255\n";
  write_file(path, header + "\x01\x02");  // 2 of 4 payload bytes
  try {
    load_pgm(path);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("offset " + std::to_string(header.size() + 2)) !=
          std::string::npos);
  }
}

TEST_CASE("load_pgm rejects maxval > 255") {
  const std::string path = temp_path("xlhwr_maxval.pgm");
  write_file(path, "P2\n1 1\n65535\n0\n");
  CHECK_THROWS_AS(load_pgm(path), IoError);
}

TEST_CASE("binarize: constant image has no ink") {
  GrayImage img(8, 8, 200);
  const BinaryImage bin = binarize(img);
  CHECK(bin.ink_count() == 0);
}

TEST_CASE("binarize: perfect bimodal splits exactly on the dark block") {
  GrayImage img(10, 4, 255);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 3; ++x) img.at(x, y) = 0;
  const BinaryImage bin = binarize(img);
  CHECK(bin.ink_count() == 12);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 10; ++x) CHECK(bin.at(x, y) == (x < 3 ? 1 : 0));
}

TEST_CASE("binarize flips inverted-polarity input") {
  // Light-on-dark: most pixels dark -> polarity rule inverts.
  GrayImage img(10, 10, 10);
  for (int x = 0; x < 3; ++x) img.at(x, 0) = 250;
  const BinaryImage bin = binarize(img);
  CHECK(bin.ink_count() == 3);
  CHECK(bin.at(0, 0) == 1);
}

TEST_CASE("otsu_threshold equals the exhaustive between-class maximizer") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    GrayImage img(16, 16);
    // Two noisy intensity populations plus stray values.
    for (auto& v : img.data) {
      const double r = rng.uniform();
      if (r < 0.45)
        v = static_cast<std::uint8_t>(30 + rng.below(40));
      else if (r < 0.9)
        v = static_cast<std::uint8_t>(160 + rng.below(60));
      else
        v = static_cast<std::uint8_t>(rng.below(256));
    }
    // Brute force over every threshold with the same class convention.
    std::size_t hist[256] = {};
    for (auto v : img.data) ++hist[v];
    const double total = static_cast<double>(img.data.size());
    double best = 0.0;
    int best_t = 0;
    for (int t = 1; t <= 255; ++t) {
      double w0 = 0.0, w1 = 0.0, s0 = 0.0, s1 = 0.0;
      for (int v = 0; v < 256; ++v) {
        if (v < t) {
          w0 += hist[v];
          s0 += static_cast<double>(v) * hist[v];
        } else {
          w1 += hist[v];
          s1 += static_cast<double>(v) * hist[v];
        }
      }
      if (w0 == 0.0 || w1 == 0.0) continue;
      const double mu0 = s0 / w0, mu1 = s1 / w1;
      const double between = (w0 / total) * (w1 / total) * (mu0 - mu1) *
                             (mu0 - mu1) * total * total;
      if (between > best) {
        best = between;
        best_t = t;
      }
    }
    CHECK(otsu_threshold(img) == best_t);
  }
}

TEST_CASE("connected_components: blank and two blocks") {
  BinaryImage blank(5, 5);
  CHECK(connected_components(blank).empty());

  BinaryImage two(10, 10);
  for (int y = 1; y <= 2; ++y)
    for (int x = 1; x <= 2; ++x) two.at(x, y) = 1;
  for (int y = 6; y <= 7; ++y)
    for (int x = 6; x <= 7; ++x) two.at(x, y) = 1;
  const auto comps = connected_components(two);
  REQUIRE(comps.size() == 2);
  CHECK(comps[0].x0 == 1);
  CHECK(comps[0].y0 == 1);
  CHECK(comps[0].x1 == 2);
  CHECK(comps[0].y1 == 2);
  CHECK(comps[1].x0 == 6);
  CHECK(comps[1].y0 == 6);
  CHECK(comps[0].pixels.size() == 4);
}

TEST_CASE("connected_components agrees with a flood-fill oracle") {
  const BinaryImage bin = random_binary(64, 64, 0.2, 7);
  const auto comps = connected_components(bin);
  const auto oracle = flood_fill_labels(bin);

  // Same partition: pixels share a component iff they share an oracle label.
  std::map<int, std::set<int>> oracle_to_comp;
  std::size_t covered = 0;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (const auto& p : comps[c].pixels) {
      REQUIRE(bin.at(p.x, p.y) == 1);
      oracle_to_comp[oracle[p.y][p.x]].insert(static_cast<int>(c));
      ++covered;
    }
  }
  CHECK(covered == bin.ink_count());
  int max_label = -1;
  for (const auto& row : oracle)
    for (int l : row) max_label = std::max(max_label, l);
  CHECK(comps.size() == static_cast<std::size_t>(max_label + 1));
  for (const auto& [label, comp_ids] : oracle_to_comp)
    CHECK(comp_ids.size() == 1);
}

TEST_CASE("components are disjoint, tight, and ordered") {
  const BinaryImage bin = random_binary(40, 30, 0.15, 99);
  const auto comps = connected_components(bin);
  std::set<std::pair<int, int>> seen;
  for (const auto& c : comps) {
    int x0 = bin.width, y0 = bin.height, x1 = -1, y1 = -1;
    for (const auto& p : c.pixels) {
      CHECK(!seen.count({p.x, p.y}));
      seen.insert({p.x, p.y});
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    CHECK(c.x0 == x0);
    CHECK(c.x1 == x1);
    CHECK(c.y0 == y0);
    CHECK(c.y1 == y1);
  }
  for (std::size_t i = 1; i < comps.size(); ++i) {
    const bool ordered = comps[i - 1].y0 < comps[i].y0 ||
                         (comps[i - 1].y0 == comps[i].y0 &&
                          comps[i - 1].x0 <= comps[i].x0);
    CHECK(ordered);
  }
}

TEST_CASE("thin: 1-pixel line is a fixed point") {
  BinaryImage line(20, 5);
  for (int x = 2; x < 18; ++x) line.at(x, 2) = 1;
  const BinaryImage out = thin(line);
  CHECK(out.data == line.data);
}

TEST_CASE("thin: filled bar collapses to a 1-pixel horizontal chain") {
  BinaryImage bar(20, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 20; ++x) bar.at(x, y) = 1;
  const BinaryImage out = thin(bar);
  REQUIRE(out.ink_count() > 10);
  // Every occupied column holds exactly one pixel, all on the middle row.
  for (int x = 0; x < 20; ++x) {
    int count = 0;
    for (int y = 0; y < 5; ++y) count += out.at(x, y);
    CHECK(count <= 1);
    if (count == 1) CHECK(out.at(x, 2) == 1);
  }
  CHECK(connected_components(out).size() == 1);
}

TEST_CASE("thin: blank stays blank and thinning is idempotent") {
  BinaryImage blank(10, 10);
  CHECK(thin(blank).ink_count() == 0);

  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const BinaryImage bin = random_binary(32, 32, 0.35, seed);
    const BinaryImage once = thin(bin);
    const BinaryImage twice = thin(once);
    CHECK(once.data == twice.data);
  }
}

TEST_CASE("thin preserves per-component connectivity") {
  BinaryImage blob(30, 30);
  for (int y = 5; y < 25; ++y)
    for (int x = 5; x < 12; ++x) blob.at(x, y) = 1;
  for (int y = 12; y < 18; ++y)
    for (int x = 5; x < 25; ++x) blob.at(x, y) = 1;
  CHECK(connected_components(blob).size() == 1);
  CHECK(connected_components(thin(blob)).size() == 1);
}

TEST_CASE("h_projection counts ink per row") {
  BinaryImage blank(6, 4);
  CHECK(h_projection(blank) == std::vector<int>{0, 0, 0, 0});

  BinaryImage full_row(6, 4);
  for (int x = 0; x < 6; ++x) full_row.at(x, 2) = 1;
  CHECK(h_projection(full_row) == std::vector<int>{0, 0, 6, 0});

  const BinaryImage bin = random_binary(24, 16, 0.3, 5);
  const auto proj = h_projection(bin);
  REQUIRE(proj.size() == 16);
  long total = 0;
  for (int y = 0; y < 16; ++y) {
    int row = 0;
    for (int x = 0; x < 24; ++x) row += bin.at(x, y);
    CHECK(proj[y] == row);
    total += row;
  }
  CHECK(static_cast<std::size_t>(total) == bin.ink_count());
}
