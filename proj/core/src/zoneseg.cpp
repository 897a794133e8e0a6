#include "xlhwr/zoneseg.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "xlhwr/errors.hpp"
#include "xlhwr/phog.hpp"

namespace xlhwr {

namespace fs = std::filesystem;

std::vector<LowerTemplate> load_templates(const std::string& dir) {
  std::vector<std::string> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.path().extension() == ".pgm") files.push_back(entry.path().string());
  }
  if (ec) throw IoError(dir + ": cannot list template directory");
  std::sort(files.begin(), files.end());
  std::vector<LowerTemplate> out;
  for (const auto& f : files) {
    const BinaryImage bin = binarize(load_pgm(f));
    const auto comps = connected_components(bin);
    if (comps.empty()) continue;  // blank template file carries no shape
    // Tight crop over all ink.
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
    out.push_back({fs::path(f).stem().string(), std::move(shape)});
  }
  return out;
}

MatraBand detect_matra(const BinaryImage& bin) {
  const auto proj = h_projection(bin);
  const int upper_half = std::max(1, bin.height / 2);
  int peak = 0, peak_row = -1;
  for (int r = 0; r < upper_half; ++r) {
    if (proj[r] > peak) {
      peak = proj[r];
      peak_row = r;
    }
  }
  if (peak <= 0) throw DataError("detect_matra: no ink in the upper half");

  const double cut = kMatraBandFraction * peak;
  MatraBand band{peak_row, peak_row};
  while (band.top > 0 && proj[band.top - 1] >= cut) --band.top;
  while (band.bottom + 1 < bin.height && proj[band.bottom + 1] >= cut)
    ++band.bottom;
  return band;
}

namespace {

// Components of the ink restricted to rows [row0, row1], in original
// coordinates.
std::vector<ZonedComponent> components_in_rows(const BinaryImage& bin,
                                               int row0, int row1) {
  row0 = std::max(row0, 0);
  row1 = std::min(row1, bin.height - 1);
  if (row0 > row1) return {};
  BinaryImage strip(bin.width, row1 - row0 + 1);
  for (int y = row0; y <= row1; ++y)
    for (int x = 0; x < bin.width; ++x)
      if (bin.at(x, y)) strip.at(x, y - row0) = 1;
  std::vector<ZonedComponent> out;
  for (auto& c : connected_components(strip)) {
    Component shifted;
    shifted.pixels.reserve(c.pixels.size());
    for (const auto& p : c.pixels) shifted.pixels.push_back({p.x, p.y + row0});
    shifted.x0 = c.x0;
    shifted.x1 = c.x1;
    shifted.y0 = c.y0 + row0;
    shifted.y1 = c.y1 + row0;
    shifted.cx = c.cx;
    shifted.cy = c.cy + row0;
    out.push_back({std::move(shifted), c.x0, c.x1});
  }
  return out;
}

}  // namespace

std::vector<ZonedComponent> extract_upper(const BinaryImage& bin,
                                          const MatraBand& band) {
  return components_in_rows(bin, 0, band.top - 1);
}

double shape_correlation(const BinaryImage& a, const BinaryImage& b) {
  constexpr int kSide = 16;
  // Shapes are bbox-normalized into the frame and dilated once; thin strokes
  // otherwise decorrelate under pixel-level misalignment.
  auto to_frame = [](const BinaryImage& src) {
    std::vector<double> v(kSide * kSide, 0.0);
    if (src.width < 1 || src.height < 1) return v;
    for (int y = 0; y < kSide; ++y) {
      const int sy = static_cast<int>((static_cast<long long>(y) * src.height) / kSide);
      for (int x = 0; x < kSide; ++x) {
        const int sx = static_cast<int>((static_cast<long long>(x) * src.width) / kSide);
        v[static_cast<std::size_t>(y) * kSide + x] = src.at(sx, sy) ? 1.0 : 0.0;
      }
    }
    std::vector<double> dilated = v;
    for (int y = 0; y < kSide; ++y) {
      for (int x = 0; x < kSide; ++x) {
        if (v[static_cast<std::size_t>(y) * kSide + x] > 0.0) continue;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = y + dy, nx = x + dx;
            if (ny >= 0 && ny < kSide && nx >= 0 && nx < kSide &&
                v[static_cast<std::size_t>(ny) * kSide + nx] > 0.0)
              dilated[static_cast<std::size_t>(y) * kSide + x] = 1.0;
          }
        }
      }
    }
    return dilated;
  };
  const auto va = to_frame(a);
  const auto vb = to_frame(b);

  // Peak over small displacements (template matching); a single fixed
  // alignment under-scores genuinely matching shapes.
  constexpr int kMaxShift = 3;
  auto ncc_at = [&](int ox, int oy) {
    const double n = kSide * kSide;
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < kSide * kSide; ++i) ma += va[i];
    for (int y = 0; y < kSide; ++y)
      for (int x = 0; x < kSide; ++x) {
        const int sy = y + oy, sx = x + ox;
        if (sy >= 0 && sy < kSide && sx >= 0 && sx < kSide)
          mb += vb[static_cast<std::size_t>(sy) * kSide + sx];
      }
    ma /= n;
    mb /= n;
    double cov = 0.0, sa = 0.0, sb = 0.0;
    for (int y = 0; y < kSide; ++y) {
      for (int x = 0; x < kSide; ++x) {
        const int sy = y + oy, sx = x + ox;
        const double bv = (sy >= 0 && sy < kSide && sx >= 0 && sx < kSide)
                              ? vb[static_cast<std::size_t>(sy) * kSide + sx]
                              : 0.0;
        const double da = va[static_cast<std::size_t>(y) * kSide + x] - ma;
        const double db = bv - mb;
        cov += da * db;
        sa += da * da;
        sb += db * db;
      }
    }
    if (sa <= 0.0 || sb <= 0.0) return 0.0;
    return cov / std::sqrt(sa * sb);
  };

  double best = 0.0;
  for (int oy = -kMaxShift; oy <= kMaxShift; ++oy)
    for (int ox = -kMaxShift; ox <= kMaxShift; ++ox)
      best = std::max(best, ncc_at(ox, oy));
  return best;
}

namespace {

// Bottom of the busy band below the matra: the downward scan ends once the
// projection stays under 10% of the peak for 3 consecutive rows (descender
// shapes sit below that gap), while shorter dips inside sparse glyph rows do
// not cut the band.
int busy_bottom_row(const BinaryImage& bin, const MatraBand& band) {
  const auto proj = h_projection(bin);
  int peak = 0;
  for (int r = 0; r < bin.height; ++r) peak = std::max(peak, proj[r]);
  const double cut = kBusyZoneFraction * peak;
  int busy = band.bottom;
  int below_run = 0;
  for (int r = band.bottom + 1; r < bin.height; ++r) {
    if (proj[r] >= cut) {
      busy = r;
      below_run = 0;
    } else if (++below_run >= 3) {
      break;
    }
  }
  return busy;
}

}  // namespace

std::vector<ZonedComponent> extract_lower(
    const BinaryImage& bin, const MatraBand& band,
    const std::vector<LowerTemplate>& templates) {
  if (templates.empty()) return {};
  const int busy = busy_bottom_row(bin, band);
  std::vector<ZonedComponent> out;
  for (auto& cand : components_in_rows(bin, busy + 1, bin.height - 1)) {
    // Residue slivers of busy-zone glyphs are not modifier candidates.
    if (cand.component.box_height() < 6 || cand.component.pixels.size() < 20)
      continue;
    const BinaryImage shape = cand.component.raster();
    double best = -1.0;
    for (const auto& t : templates)
      best = std::max(best, shape_correlation(shape, t.shape));
    if (best >= kLowerMatchThreshold) out.push_back(std::move(cand));
  }
  return out;
}

ZoneSplit split_zones(const GrayImage& img,
                      const std::vector<LowerTemplate>& templates) {
  const BinaryImage bin = binarize(img);
  if (bin.ink_count() == 0) throw DataError("split_zones: blank image");

  ZoneSplit split;
  split.matra = detect_matra(bin);
  split.upper = extract_upper(bin, split.matra);
  split.lower = extract_lower(bin, split.matra, templates);
  split.busy_top = split.matra.bottom + 1;
  split.busy_bottom = busy_bottom_row(bin, split.matra);

  // Middle = ink below the band minus extracted lower shapes; keep any
  // unextracted descender rows inside the strip.
  BinaryImage below(bin.width, bin.height);
  for (int y = split.matra.bottom + 1; y < bin.height; ++y)
    for (int x = 0; x < bin.width; ++x)
      if (bin.at(x, y)) below.at(x, y) = 1;
  for (const auto& zc : split.lower)
    for (const auto& p : zc.component.pixels) below.at(p.x, p.y) = 0;

  int last_ink = split.matra.bottom;  // may stay: empty strip degenerates to 1 row
  for (int y = bin.height - 1; y > split.matra.bottom; --y) {
    bool any = false;
    for (int x = 0; x < bin.width && !any; ++x) any = below.at(x, y) != 0;
    if (any) {
      last_ink = y;
      break;
    }
  }
  const int row0 = std::min(split.matra.bottom + 1, bin.height - 1);
  const int row1 = std::max(last_ink, row0);
  split.middle_row0 = row0;
  split.middle = BinaryImage(bin.width, row1 - row0 + 1);
  for (int y = row0; y <= row1; ++y)
    for (int x = 0; x < bin.width; ++x)
      if (below.at(x, y)) split.middle.at(x, y - row0) = 1;
  return split;
}

}  // namespace xlhwr
