#include "pref/imgproc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pref/errors.hpp"

namespace pref {

std::string_view to_string(ColorSpace cs) {
  switch (cs) {
    case ColorSpace::HS: return "HS";
    case ColorSpace::RGB: return "RGB";
    case ColorSpace::Lab: return "Lab";
  }
  return "?";
}

ColorSpace parse_colorspace(std::string_view name) {
  for (auto cs : kColorSpaces) {
    if (to_string(cs) == name) return cs;
  }
  throw ParseError("unknown colorspace '" + std::string(name) + "'");
}

ImageBuffer::ImageBuffer(int width, int height)
    : ImageBuffer(width, height, std::vector<std::uint8_t>(std::size_t(std::max(width, 0)) *
                                                           std::max(height, 0) * 3)) {}

ImageBuffer::ImageBuffer(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  if (pixels_.size() != std::size_t(width) * height * 3) {
    throw InvalidArgument("pixel buffer length does not match width*height*3");
  }
}

void ImageBuffer::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  auto* p = at(x, y);
  p[0] = r;
  p[1] = g;
  p[2] = b;
}

WeightMask::WeightMask(int width, int height, double fill)
    : WeightMask(width, height,
                 std::vector<double>(std::size_t(std::max(width, 0)) * std::max(height, 0), fill)) {}

WeightMask::WeightMask(int width, int height, std::vector<double> weights)
    : width_(width), height_(height), weights_(std::move(weights)) {
  if (width <= 0 || height <= 0) throw InvalidArgument("mask dimensions must be positive");
  if (weights_.size() != std::size_t(width) * height) {
    throw InvalidArgument("mask length does not match width*height");
  }
  for (double w : weights_) {
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("mask weights must lie in [0,1]");
  }
}

int PatchLayout::layer1_count() const {
  if (image_width < patch_size || image_height < patch_size) return 0;
  return ((image_width - patch_size) / stride + 1) * ((image_height - patch_size) / stride + 1);
}

int PatchLayout::layer2_count() const {
  if (!overlap_layer) return 0;
  const int w = image_width - layer2_offset;
  const int h = image_height - layer2_offset;
  if (w < patch_size || h < patch_size) return 0;
  return ((w - patch_size) / stride + 1) * ((h - patch_size) / stride + 1);
}

bool PatchFeature::is_zero() const {
  const auto n = std::min<std::size_t>(values.size(), kHistogramBins);
  return std::all_of(values.begin(), values.begin() + n, [](double v) { return v == 0.0; });
}

namespace {

struct Tap {
  int i0;
  int i1;
  double frac;
};

// Half-pixel-centre mapping; the identity resize maps every output sample
// exactly onto its source pixel.
std::vector<Tap> bilinear_taps(int src, int dst) {
  std::vector<Tap> taps(dst);
  const double scale = double(src) / double(dst);
  for (int i = 0; i < dst; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, double(src - 1));
    const int i0 = int(std::floor(s));
    taps[i] = {i0, std::min(i0 + 1, src - 1), s - i0};
  }
  return taps;
}

void check_target(int target_w, int target_h) {
  if (target_w <= 0 || target_h <= 0) throw InvalidArgument("resize target must be positive");
}

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

int uniform_bin(double v, double lo, double hi, int bins) {
  const int b = int(std::floor((v - lo) / (hi - lo) * bins));
  return std::clamp(b, 0, bins - 1);
}

using BinPlane = std::vector<std::uint8_t>;

BinPlane bin_plane(const ImageBuffer& img, ColorSpace cs) {
  BinPlane plane(std::size_t(img.width()) * img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto* p = img.at(x, y);
      plane[std::size_t(y) * img.width() + x] = std::uint8_t(color_bin(cs, p[0], p[1], p[2]));
    }
  }
  return plane;
}

PatchFeature accumulate(const BinPlane& bins, int image_w, int image_h, const WeightMask& mask,
                        const Rect& r, ColorSpace cs, bool spatial, int index) {
  PatchFeature f;
  f.colorspace = cs;
  f.patch_index = index;
  f.cx = (r.x + r.width / 2.0) / image_w;
  f.cy = (r.y + r.height / 2.0) / image_h;
  f.values.assign(kHistogramBins + (spatial ? 2 : 0), 0.0);

  double total = 0.0;
  for (int y = r.y; y < r.y + r.height; ++y) {
    for (int x = r.x; x < r.x + r.width; ++x) {
      const double w = mask.at(x, y);
      f.values[bins[std::size_t(y) * image_w + x]] += w;
      total += w;
    }
  }
  if (total <= 0.0) {
    std::fill(f.values.begin(), f.values.end(), 0.0);
    return f;
  }
  for (int i = 0; i < kHistogramBins; ++i) f.values[i] /= total;
  if (spatial) {
    f.values[kHistogramBins] = f.cx;
    f.values[kHistogramBins + 1] = f.cy;
  }
  return f;
}

void check_mask(const ImageBuffer& img, const WeightMask& mask) {
  if (img.empty()) throw InvalidArgument("empty image");
  if (mask.width() != img.width() || mask.height() != img.height()) {
    throw InvalidArgument("mask size does not match image size");
  }
}

}  // namespace

ImageBuffer resize_image(const ImageBuffer& img, int target_w, int target_h) {
  check_target(target_w, target_h);
  if (img.empty()) throw InvalidArgument("cannot resize an empty image");
  if (target_w == img.width() && target_h == img.height()) return img;

  const auto tx = bilinear_taps(img.width(), target_w);
  const auto ty = bilinear_taps(img.height(), target_h);
  ImageBuffer out(target_w, target_h);
  for (int y = 0; y < target_h; ++y) {
    const auto& vy = ty[y];
    for (int x = 0; x < target_w; ++x) {
      const auto& vx = tx[x];
      const auto* p00 = img.at(vx.i0, vy.i0);
      const auto* p01 = img.at(vx.i1, vy.i0);
      const auto* p10 = img.at(vx.i0, vy.i1);
      const auto* p11 = img.at(vx.i1, vy.i1);
      auto* q = out.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = p00[c] * (1.0 - vx.frac) + p01[c] * vx.frac;
        const double bottom = p10[c] * (1.0 - vx.frac) + p11[c] * vx.frac;
        const double v = top * (1.0 - vy.frac) + bottom * vy.frac;
        q[c] = std::uint8_t(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

WeightMask resize_mask(const WeightMask& mask, int target_w, int target_h) {
  check_target(target_w, target_h);
  if (target_w == mask.width() && target_h == mask.height()) return mask;

  const auto tx = bilinear_taps(mask.width(), target_w);
  const auto ty = bilinear_taps(mask.height(), target_h);
  std::vector<double> out(std::size_t(target_w) * target_h);
  for (int y = 0; y < target_h; ++y) {
    const auto& vy = ty[y];
    for (int x = 0; x < target_w; ++x) {
      const auto& vx = tx[x];
      const double top = mask.at(vx.i0, vy.i0) * (1.0 - vx.frac) + mask.at(vx.i1, vy.i0) * vx.frac;
      const double bottom =
          mask.at(vx.i0, vy.i1) * (1.0 - vx.frac) + mask.at(vx.i1, vy.i1) * vx.frac;
      out[std::size_t(y) * target_w + x] =
          std::clamp(top * (1.0 - vy.frac) + bottom * vy.frac, 0.0, 1.0);
    }
  }
  return WeightMask(target_w, target_h, std::move(out));
}

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;

  Hsv out{0.0, mx > 0.0 ? delta / mx : 0.0, mx};
  if (delta <= 0.0) return out;

  double h;
  if (mx == r) {
    h = std::fmod((g - b) / delta, 6.0);
  } else if (mx == g) {
    h = (b - r) / delta + 2.0;
  } else {
    h = (r - g) / delta + 4.0;
  }
  h *= 60.0;
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

Lab rgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = srgb_to_linear(r8 / 255.0);
  const double g = srgb_to_linear(g8 / 255.0);
  const double b = srgb_to_linear(b8 / 255.0);

  // sRGB primaries, D65 white
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  constexpr double xn = 0.95047, yn = 1.0, zn = 1.08883;

  const double fx = lab_f(x / xn), fy = lab_f(y / yn), fz = lab_f(z / zn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

int color_bin(ColorSpace cs, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  switch (cs) {
    case ColorSpace::HS: {
      const auto hsv = rgb_to_hsv(r, g, b);
      return uniform_bin(hsv.h, 0.0, 360.0, 8) * 8 + uniform_bin(hsv.s, 0.0, 1.0, 8);
    }
    case ColorSpace::RGB:
      return (r / 64) * 16 + (g / 64) * 4 + (b / 64);
    case ColorSpace::Lab: {
      const auto lab = rgb_to_lab(r, g, b);
      return uniform_bin(lab.l, 0.0, 100.0, 4) * 16 + uniform_bin(lab.a, -128.0, 128.0, 4) * 4 +
             uniform_bin(lab.b, -128.0, 128.0, 4);
    }
  }
  return 0;
}

std::vector<Rect> patch_grid(const PatchLayout& layout) {
  std::vector<Rect> rects;
  rects.reserve(std::size_t(layout.count()));
  const int p = layout.patch_size;
  for (int y = 0; y + p <= layout.image_height; y += layout.stride) {
    for (int x = 0; x + p <= layout.image_width; x += layout.stride) rects.push_back({x, y, p, p});
  }
  if (layout.overlap_layer) {
    for (int y = layout.layer2_offset; y + p <= layout.image_height; y += layout.stride) {
      for (int x = layout.layer2_offset; x + p <= layout.image_width; x += layout.stride) {
        rects.push_back({x, y, p, p});
      }
    }
  }
  return rects;
}

PatchFeature patch_histogram(const ImageBuffer& img, const WeightMask& mask, const Rect& rect,
                             ColorSpace cs, bool spatial) {
  check_mask(img, mask);
  if (rect.width <= 0 || rect.height <= 0 || rect.x < 0 || rect.y < 0 ||
      rect.x + rect.width > img.width() || rect.y + rect.height > img.height()) {
    throw InvalidArgument("patch rectangle lies outside the image");
  }
  BinPlane bins(std::size_t(img.width()) * img.height(), 0);
  for (int y = rect.y; y < rect.y + rect.height; ++y) {
    for (int x = rect.x; x < rect.x + rect.width; ++x) {
      const auto* p = img.at(x, y);
      bins[std::size_t(y) * img.width() + x] = std::uint8_t(color_bin(cs, p[0], p[1], p[2]));
    }
  }
  return accumulate(bins, img.width(), img.height(), mask, rect, cs, spatial, 0);
}

ImageFeatures extract_features(const ImageBuffer& img, const WeightMask& mask, bool spatial,
                               bool overlap_layer) {
  check_mask(img, mask);
  PatchLayout layout;
  layout.image_width = img.width();
  layout.image_height = img.height();
  layout.overlap_layer = overlap_layer;
  const auto rects = patch_grid(layout);

  ImageFeatures out;
  for (std::size_t c = 0; c < kColorSpaces.size(); ++c) {
    const auto cs = kColorSpaces[c];
    const auto bins = bin_plane(img, cs);
    auto& list = out.per_colorspace[c];
    list.reserve(rects.size());
    for (std::size_t i = 0; i < rects.size(); ++i) {
      list.push_back(accumulate(bins, img.width(), img.height(), mask, rects[i], cs, spatial,
                                int(i)));
    }
  }
  return out;
}

}  // namespace pref
