#pragma once

#include <vector>

#include "xlhwr/raster.hpp"

namespace xlhwr {

// Pyramid-of-HOG vector: level 0 (1x1 cells), level 1 (2x2), level 2 (4x4),
// 8 unsigned orientation bins per cell, cells row-major, 168 dims total.
using PhogVector = std::vector<double>;

inline constexpr int kPhogBins = 8;
inline constexpr int kPhogLevels = 2;
inline constexpr int kPhogDim = 168;  // 8 + 32 + 128

struct FeatureSequence {
  std::vector<PhogVector> frames;
  int window_width = 0;
  int window_shift = 0;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

// Default sliding-window geometry for the 64 px canvas.
inline constexpr int kDefaultWindowWidth = 8;
inline constexpr int kDefaultWindowShift = 3;

// Nearest-neighbour resample to (w, h).
GrayImage resize_nn(const GrayImage& img, int w, int h);

// PHOG of a gray region. Gradients are clamped central differences, with
// unsigned orientation in [0, 180) split into `bins` equal sectors and
// magnitude-weighted votes; each pyramid level is L1-normalized as a block
// (or left all-zero). Regions smaller than 4x4 are upscaled first.
PhogVector phog(const GrayImage& region, int levels = kPhogLevels,
                int bins = kPhogBins);

// Left-to-right sliding windows over the middle strip rendered as {0,255}
// grayscale: frames at x = 0, shift, 2*shift, ... while x+width fits; an
// image narrower than the window yields one right-padded frame.
FeatureSequence window_features(const BinaryImage& middle,
                                int width = kDefaultWindowWidth,
                                int shift = kDefaultWindowShift);

// Modifier descriptor: component raster resized to 150x150, then phog.
PhogVector modifier_features(const Component& comp);

inline constexpr int kModifierSide = 150;

}  // namespace xlhwr
