#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace xlhwr {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major, intensities in [0,255]

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
};

struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major, 1 = ink

  BinaryImage() = default;
  BinaryImage(int w, int h)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  bool ink(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height && at(x, y) != 0;
  }
  std::size_t ink_count() const;
};

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct Component {
  std::vector<Pixel> pixels;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // tight bounding box, inclusive
  double cx = 0.0, cy = 0.0;           // centroid

  int box_width() const { return x1 - x0 + 1; }
  int box_height() const { return y1 - y0 + 1; }
  // Component raster cropped to the bounding box.
  BinaryImage raster() const;
};

// Plain (P2) or raw (P5) PGM with maxval <= 255. Parse failures report the
// byte offset of the offending datum.
GrayImage load_pgm(const std::string& path);

// Canonical emit: "P5\n<w> <h>\n255\n" + raw payload.
void save_pgm(const GrayImage& img, const std::string& path);

// Exhaustive-search Otsu threshold t in [0,255]: maximizes between-class
// variance of the split {< t} / {>= t}; first maximizer wins. Constant
// images give t = 0 so nothing is ink.
int otsu_threshold(const GrayImage& img);

// Ink = pixels strictly below the Otsu threshold (dark-on-light). If that
// labels more than half the image as ink, polarity is flipped.
BinaryImage binarize(const GrayImage& img);

// 8-connected components of ink, ordered by (y0, x0).
std::vector<Component> connected_components(const BinaryImage& bin);

// Zhang-Suen two-subiteration thinning, run to a fixed point.
BinaryImage thin(const BinaryImage& bin);

// Per-row ink counts; result.size() == height.
std::vector<int> h_projection(const BinaryImage& bin);

}  // namespace xlhwr
