#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xlhwr/raster.hpp"

namespace xlhwr {

struct MatraBand {
  int top = 0;
  int bottom = 0;
};

struct ZonedComponent {
  Component component;  // pixels in original image coordinates
  int x0 = 0, x1 = 0;   // horizontal extent
};

struct ZoneSplit {
  MatraBand matra;
  BinaryImage middle;   // strip below the matra band, lower modifiers removed
  int middle_row0 = 0;  // original row of middle's row 0
  std::vector<ZonedComponent> upper;
  std::vector<ZonedComponent> lower;
  int busy_top = 0;     // first middle-zone row
  int busy_bottom = 0;  // last row with >= 10% of peak projection
};

struct LowerTemplate {
  std::string label;
  BinaryImage shape;  // tight ink crop
};

// Templates from a directory of PGM files; the filename stem is the label.
std::vector<LowerTemplate> load_templates(const std::string& dir);

// Thickest contiguous band around the upper-half projection maximum whose
// rows all reach 70% of that peak.
MatraBand detect_matra(const BinaryImage& bin);

// All ink components strictly above the band top (a modifier touching the
// matra is cut at the band boundary), ordered by (y0, x0).
std::vector<ZonedComponent> extract_upper(const BinaryImage& bin,
                                          const MatraBand& band);

// Candidate shapes below the busy-zone baseline are split off when their
// normalized cross-correlation against some template reaches 0.6; the rest
// stay with the middle zone.
std::vector<ZonedComponent> extract_lower(
    const BinaryImage& bin, const MatraBand& band,
    const std::vector<LowerTemplate>& templates);

// Correlation of two binary shapes compared in a fixed 24x24 frame.
double shape_correlation(const BinaryImage& a, const BinaryImage& b);

inline constexpr double kLowerMatchThreshold = 0.6;
inline constexpr double kMatraBandFraction = 0.7;
inline constexpr double kBusyZoneFraction = 0.1;

// binarize -> detect_matra -> extract_upper -> extract_lower; middle is the
// remaining ink below the band, cropped vertically.
ZoneSplit split_zones(const GrayImage& img,
                      const std::vector<LowerTemplate>& templates);

}  // namespace xlhwr
