#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pref {

enum class ColorSpace { HS, RGB, Lab };

inline constexpr std::array<ColorSpace, 3> kColorSpaces = {ColorSpace::HS, ColorSpace::RGB,
                                                           ColorSpace::Lab};

std::string_view to_string(ColorSpace cs);
ColorSpace parse_colorspace(std::string_view name);

/// 8-bit sRGB image, row-major, interleaved R,G,B.
class ImageBuffer {
public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height);
  ImageBuffer(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  const std::uint8_t* at(int x, int y) const { return &pixels_[3 * (std::size_t(y) * width_ + x)]; }
  std::uint8_t* at(int x, int y) { return &pixels_[3 * (std::size_t(y) * width_ + x)]; }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

  bool operator==(const ImageBuffer&) const = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Per-pixel foreground weights in [0,1], row-major.
class WeightMask {
public:
  WeightMask() = default;
  WeightMask(int width, int height, double fill = 1.0);
  WeightMask(int width, int height, std::vector<double> weights);

  static WeightMask ones(int width, int height) { return WeightMask(width, height, 1.0); }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double at(int x, int y) const { return weights_[std::size_t(y) * width_ + x]; }
  double& at(int x, int y) { return weights_[std::size_t(y) * width_ + x]; }
  std::span<const double> weights() const noexcept { return weights_; }

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> weights_;
};

struct Rect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  bool operator==(const Rect&) const = default;
};

/// Two layers of square patches: layer 1 tiles from the origin, layer 2 is
/// shifted by half a patch on both axes. Layer 2 can be switched off.
struct PatchLayout {
  int image_width = 128;
  int image_height = 128;
  int patch_size = 16;
  int stride = 16;
  int layer2_offset = 8;
  bool overlap_layer = true;

  int layer1_count() const;
  int layer2_count() const;
  int count() const { return layer1_count() + layer2_count(); }
};

inline constexpr int kHistogramBins = 64;

struct PatchFeature {
  ColorSpace colorspace = ColorSpace::HS;
  std::vector<double> values;  // 64 histogram bins, then (cx, cy) when spatial
  int patch_index = 0;
  double cx = 0.0;
  double cy = 0.0;

  /// True when the histogram part carries no mass (patch fully masked out).
  bool is_zero() const;
};

struct Hsv {
  double h;  // degrees, [0,360)
  double s;
  double v;
};

struct Lab {
  double l;
  double a;
  double b;
};

ImageBuffer resize_image(const ImageBuffer& img, int target_w, int target_h);
WeightMask resize_mask(const WeightMask& mask, int target_w, int target_h);

Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);
Lab rgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Histogram bin (0..63) a pixel falls into for a given colorspace.
int color_bin(ColorSpace cs, std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Layer 1 row-major, then layer 2 row-major.
std::vector<Rect> patch_grid(const PatchLayout& layout);

PatchFeature patch_histogram(const ImageBuffer& img, const WeightMask& mask, const Rect& rect,
                             ColorSpace cs, bool spatial);

struct ImageFeatures {
  // indexed by colorspace order in kColorSpaces
  std::array<std::vector<PatchFeature>, 3> per_colorspace;

  const std::vector<PatchFeature>& operator[](ColorSpace cs) const {
    return per_colorspace[static_cast<std::size_t>(cs)];
  }
};

ImageFeatures extract_features(const ImageBuffer& img, const WeightMask& mask, bool spatial,
                               bool overlap_layer = true);

}  // namespace pref
