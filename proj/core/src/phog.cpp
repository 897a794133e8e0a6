#include "xlhwr/phog.hpp"

#include <cmath>
#include <numbers>

#include "xlhwr/errors.hpp"

namespace xlhwr {

GrayImage resize_nn(const GrayImage& img, int w, int h) {
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = static_cast<int>((static_cast<long long>(y) * img.height) / h);
    for (int x = 0; x < w; ++x) {
      const int sx = static_cast<int>((static_cast<long long>(x) * img.width) / w);
      out.at(x, y) = img.at(sx, sy);
    }
  }
  return out;
}

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

PhogVector phog(const GrayImage& region, int levels, int bins) {
  if (region.width < 1 || region.height < 1 || region.data.empty())
    throw DataError("phog: empty region");

  const GrayImage* src = &region;
  GrayImage scaled;
  if (region.width < 4 || region.height < 4) {
    scaled = resize_nn(region, std::max(region.width, 4),
                       std::max(region.height, 4));
    src = &scaled;
  }
  const int w = src->width, h = src->height;

  // Per-pixel magnitude and bin, computed once and binned per level.
  std::vector<double> mag(static_cast<std::size_t>(w) * h);
  std::vector<int> bin(static_cast<std::size_t>(w) * h);
  const double sector = 180.0 / bins;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = static_cast<double>(src->at(clampi(x + 1, 0, w - 1), y)) -
                        static_cast<double>(src->at(clampi(x - 1, 0, w - 1), y));
      const double gy = static_cast<double>(src->at(x, clampi(y + 1, 0, h - 1))) -
                        static_cast<double>(src->at(x, clampi(y - 1, 0, h - 1)));
      const double m = std::hypot(gx, gy);
      double ang = 0.0;
      if (m > 0.0) {
        ang = std::atan2(gy, gx) * 180.0 / std::numbers::pi;  // (-180, 180]
        if (ang < 0.0) ang += 180.0;                          // unsigned
        if (ang >= 180.0) ang -= 180.0;
      }
      int b = static_cast<int>(ang / sector);
      if (b >= bins) b = bins - 1;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      mag[i] = m;
      bin[i] = b;
    }
  }

  PhogVector out;
  for (int level = 0; level <= levels; ++level) {
    const int cells = 1 << level;  // cells per axis
    std::vector<double> block(static_cast<std::size_t>(cells) * cells * bins, 0.0);
    for (int y = 0; y < h; ++y) {
      const int cy = static_cast<int>((static_cast<long long>(y) * cells) / h);
      for (int x = 0; x < w; ++x) {
        const int cx = static_cast<int>((static_cast<long long>(x) * cells) / w);
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        block[(static_cast<std::size_t>(cy) * cells + cx) * bins + bin[i]] +=
            mag[i];
      }
    }
    double sum = 0.0;
    for (double v : block) sum += v;
    if (sum > 0.0)
      for (double& v : block) v /= sum;
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

FeatureSequence window_features(const BinaryImage& middle, int width,
                                int shift) {
  if (width < 4) throw DataError("window_features: width must be >= 4");
  if (shift < 1 || shift > width)
    throw DataError("window_features: shift must be in [1, width]");

  FeatureSequence seq;
  seq.window_width = width;
  seq.window_shift = shift;

  const int h = std::max(middle.height, 1);
  auto window_gray = [&](int x0) {
    GrayImage g(width, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < width; ++x)
        g.at(x, y) = middle.ink(x0 + x, y) ? 255 : 0;  // pads with background
    return g;
  };

  if (middle.width < width) {
    seq.frames.push_back(phog(window_gray(0)));
    return seq;
  }
  for (int x = 0; x + width <= middle.width; x += shift)
    seq.frames.push_back(phog(window_gray(x)));
  return seq;
}

PhogVector modifier_features(const Component& comp) {
  if (comp.pixels.empty()) throw DataError("modifier_features: empty component");
  const BinaryImage raster = comp.raster();
  GrayImage g(raster.width, raster.height);
  for (std::size_t i = 0; i < raster.data.size(); ++i)
    g.data[i] = raster.data[i] ? 255 : 0;
  return phog(resize_nn(g, kModifierSide, kModifierSide));
}

}  // namespace xlhwr
