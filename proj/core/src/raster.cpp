#include "xlhwr/raster.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "xlhwr/errors.hpp"

namespace xlhwr {

std::size_t BinaryImage::ink_count() const {
  std::size_t n = 0;
  for (auto v : data) n += (v != 0);
  return n;
}

BinaryImage Component::raster() const {
  BinaryImage out(box_width(), box_height());
  for (const auto& p : pixels) out.at(p.x - x0, p.y - y0) = 1;
  return out;
}

namespace {

// Minimal PGM tokenizer that tracks byte offsets for error reporting.
class PgmReader {
 public:
  PgmReader(std::string bytes, const std::string& path)
      : bytes_(std::move(bytes)), path_(path) {}

  std::size_t offset() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' ||
                 c == '\v' || c == '\f') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int read_int(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long value = 0;
    bool any = false;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) fail(start, std::string("oversized ") + what);
      ++pos_;
      any = true;
    }
    if (!any) fail(start, std::string("expected ") + what);
    return static_cast<int>(value);
  }

  char read_byte(const char* what) {
    if (pos_ >= bytes_.size()) fail(pos_, std::string("expected ") + what);
    return bytes_[pos_++];
  }

  [[noreturn]] void fail(std::size_t at, const std::string& msg) const {
    throw IoError(path_ + ": " + msg + " at byte offset " +
                  std::to_string(at));
  }

  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open file");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  PgmReader r(std::move(bytes), path);

  const char m0 = r.read_byte("magic");
  const char m1 = r.read_byte("magic");
  const bool raw = (m0 == 'P' && m1 == '5');
  const bool plain = (m0 == 'P' && m1 == '2');
  if (!raw && !plain) r.fail(0, "not a P2/P5 portable graymap");

  const int w = r.read_int("width");
  const int h = r.read_int("height");
  if (w < 1 || h < 1) r.fail(r.offset(), "non-positive dimensions");
  const std::size_t maxval_at = r.offset();
  const int maxval = r.read_int("maxval");
  if (maxval < 1 || maxval > 255) r.fail(maxval_at, "maxval out of [1,255]");

  GrayImage img(w, h);
  const std::size_t n = img.data.size();
  if (raw) {
    // Exactly one whitespace byte separates the header from the payload.
    r.read_byte("whitespace before raster");
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = r.offset();
      const unsigned char v =
          static_cast<unsigned char>(r.read_byte("pixel payload"));
      if (v > maxval) r.fail(at, "pixel above maxval");
      img.data[i] = v;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = r.offset();
      const int v = r.read_int("pixel value");
      if (v > maxval) r.fail(at, "pixel above maxval");
      img.data[i] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

void save_pgm(const GrayImage& img, const std::string& path) {
  if (img.width < 1 || img.height < 1)
    throw IoError(path + ": refusing to write empty image");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open file for writing");
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError(path + ": short write");
}

int otsu_threshold(const GrayImage& img) {
  std::array<std::size_t, 256> hist{};
  for (auto v : img.data) ++hist[v];
  const double total = static_cast<double>(img.data.size());

  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * static_cast<double>(hist[i]);

  // Classes are {intensity < t} vs {intensity >= t}. A constant image keeps
  // every split at zero variance, so t stays 0 and nothing is ink.
  double best = 0.0;
  int best_t = 0;
  double w0 = 0.0, sum0 = 0.0;
  for (int t = 1; t <= 255; ++t) {
    w0 += static_cast<double>(hist[t - 1]);
    sum0 += (t - 1) * static_cast<double>(hist[t - 1]);
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

BinaryImage binarize(const GrayImage& img) {
  const int t = otsu_threshold(img);
  BinaryImage bin(img.width, img.height);
  std::size_t ink = 0;
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    bin.data[i] = img.data[i] < t ? 1 : 0;
    ink += bin.data[i];
  }
  if (2 * ink > bin.data.size()) {
    // Documents are sparse ink; majority-ink means inverted polarity.
    for (auto& v : bin.data) v ^= 1;
  }
  return bin;
}

std::vector<Component> connected_components(const BinaryImage& bin) {
  const int w = bin.width, h = bin.height;
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<Component> out;
  std::vector<Pixel> stack;

  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const std::size_t sidx = static_cast<std::size_t>(sy) * w + sx;
      if (!bin.data[sidx] || label[sidx] >= 0) continue;
      const int id = static_cast<int>(out.size());
      Component comp;
      comp.x0 = comp.x1 = sx;
      comp.y0 = comp.y1 = sy;
      stack.push_back({sx, sy});
      label[sidx] = id;
      double sx_sum = 0.0, sy_sum = 0.0;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        comp.pixels.push_back(p);
        sx_sum += p.x;
        sy_sum += p.y;
        comp.x0 = std::min(comp.x0, p.x);
        comp.x1 = std::max(comp.x1, p.x);
        comp.y0 = std::min(comp.y0, p.y);
        comp.y1 = std::max(comp.y1, p.y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = p.x + dx, ny = p.y + dy;
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
            if (bin.data[nidx] && label[nidx] < 0) {
              label[nidx] = id;
              stack.push_back({nx, ny});
            }
          }
        }
      }
      const double n = static_cast<double>(comp.pixels.size());
      comp.cx = sx_sum / n;
      comp.cy = sy_sum / n;
      out.push_back(std::move(comp));
    }
  }
  std::sort(out.begin(), out.end(), [](const Component& a, const Component& b) {
    return a.y0 != b.y0 ? a.y0 < b.y0 : a.x0 < b.x0;
  });
  return out;
}

namespace {

// Zhang-Suen neighbour order: P2..P9 clockwise from north.
constexpr int kNbrDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kNbrDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

}  // namespace

BinaryImage thin(const BinaryImage& bin) {
  BinaryImage img = bin;
  std::vector<std::size_t> to_clear;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int sub = 0; sub < 2; ++sub) {
      to_clear.clear();
      for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
          if (!img.at(x, y)) continue;
          int p[8];
          int b = 0;
          for (int k = 0; k < 8; ++k) {
            p[k] = img.ink(x + kNbrDx[k], y + kNbrDy[k]) ? 1 : 0;
            b += p[k];
          }
          if (b < 2 || b > 6) continue;
          int a = 0;
          for (int k = 0; k < 8; ++k)
            if (p[k] == 0 && p[(k + 1) % 8] == 1) ++a;
          if (a != 1) continue;
          // P2/P4/P6/P8 are indices 0/2/4/6.
          if (sub == 0) {
            if (p[0] * p[2] * p[4] != 0) continue;
            if (p[2] * p[4] * p[6] != 0) continue;
          } else {
            if (p[0] * p[2] * p[6] != 0) continue;
            if (p[0] * p[4] * p[6] != 0) continue;
          }
          to_clear.push_back(static_cast<std::size_t>(y) * img.width + x);
        }
      }
      if (!to_clear.empty()) changed = true;
      for (auto idx : to_clear) img.data[idx] = 0;
    }
  }
  return img;
}

std::vector<int> h_projection(const BinaryImage& bin) {
  std::vector<int> rows(bin.height, 0);
  for (int y = 0; y < bin.height; ++y) {
    int c = 0;
    const std::uint8_t* row = bin.data.data() + static_cast<std::size_t>(y) * bin.width;
    for (int x = 0; x < bin.width; ++x) c += (row[x] != 0);
    rows[y] = c;
  }
  return rows;
}

}  // namespace xlhwr
