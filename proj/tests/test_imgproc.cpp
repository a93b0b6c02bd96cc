#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "pref/errors.hpp"
#include "pref/imgproc.hpp"
#include "synthetic.hpp"

using namespace pref;

namespace {

ImageBuffer solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  ImageBuffer img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img.set(x, y, r, g, b);
  }
  return img;
}

double mean_intensity(const ImageBuffer& img) {
  double s = 0.0;
  for (auto v : img.pixels()) s += v;
  return s / double(img.pixels().size());
}

}  // namespace

TEST_CASE("image and mask construction validates sizes") {
  CHECK_THROWS_AS(ImageBuffer(0, 4), InvalidArgument);
  CHECK_THROWS_AS(ImageBuffer(2, 2, std::vector<std::uint8_t>(5)), InvalidArgument);
  CHECK_THROWS_AS(WeightMask(2, 2, std::vector<double>{0, 0.5, 1.0, 1.5}), InvalidArgument);
  CHECK_THROWS_AS(WeightMask(2, 2, std::vector<double>{0, 0.5, -0.1, 1.0}), InvalidArgument);
}

TEST_CASE("resize_image") {
  SUBCASE("identity resize is bit identical") {
    const auto img = synth::group_image(3);
    CHECK(resize_image(img, 128, 128) == img);
  }
  SUBCASE("constant field stays constant") {
    const auto out = resize_image(solid(2, 2, 90, 90, 90), 4, 4);
    for (auto v : out.pixels()) CHECK(v == 90);
  }
  SUBCASE("checkerboard halving keeps the mean within one gray level") {
    ImageBuffer board(256, 256);
    for (int y = 0; y < 256; ++y) {
      for (int x = 0; x < 256; ++x) {
        const std::uint8_t v = (x + y) % 2 ? 255 : 0;
        board.set(x, y, v, v, v);
      }
    }
    const auto out = resize_image(board, 128, 128);
    CHECK(out.width() == 128);
    CHECK(out.height() == 128);
    CHECK(std::abs(mean_intensity(out) - mean_intensity(board)) <= 1.0);
  }
  SUBCASE("zero-size target is rejected") {
    CHECK_THROWS_AS(resize_image(solid(4, 4, 0, 0, 0), 0, 4), InvalidArgument);
  }
  SUBCASE("mask resize stays in [0,1]") {
    WeightMask m(2, 2, std::vector<double>{0.0, 1.0, 1.0, 0.0});
    const auto r = resize_mask(m, 7, 5);
    for (double w : r.weights()) CHECK((w >= 0.0 && w <= 1.0));
  }
}

TEST_CASE("rgb_to_hsv") {
  auto red = rgb_to_hsv(255, 0, 0);
  CHECK(red.h == doctest::Approx(0.0));
  CHECK(red.s == doctest::Approx(1.0));
  CHECK(red.v == doctest::Approx(1.0));

  auto gray = rgb_to_hsv(128, 128, 128);
  CHECK(gray.h == 0.0);
  CHECK(gray.s == 0.0);
  CHECK(gray.v == doctest::Approx(128.0 / 255.0));

  // hexcone, max = B: H = 60 * (4 + (R - G) / (max - min))
  const double expected_h = 60.0 * (4.0 + (0.0 - 128.0) / 255.0);
  auto azure = rgb_to_hsv(0, 128, 255);
  CHECK(expected_h == doctest::Approx(209.88).epsilon(1e-4));
  CHECK(azure.h == doctest::Approx(expected_h).epsilon(1e-12));
  CHECK(azure.s == doctest::Approx(1.0));
  CHECK(azure.v == doctest::Approx(1.0));

  for (int r = 0; r < 256; r += 17) {
    for (int g = 0; g < 256; g += 17) {
      for (int b = 0; b < 256; b += 17) {
        const auto hsv = rgb_to_hsv(std::uint8_t(r), std::uint8_t(g), std::uint8_t(b));
        CHECK((hsv.h >= 0.0 && hsv.h < 360.0));
        CHECK((hsv.s >= 0.0 && hsv.s <= 1.0));
      }
    }
  }
}

TEST_CASE("rgb_to_lab") {
  const auto white = rgb_to_lab(255, 255, 255);
  CHECK(std::abs(white.l - 100.0) < 1e-3);
  CHECK(std::abs(white.a) < 1e-3);
  CHECK(std::abs(white.b) < 1e-3);

  const auto black = rgb_to_lab(0, 0, 0);
  CHECK(black.l == doctest::Approx(0.0));
  CHECK(black.a == doctest::Approx(0.0));
  CHECK(black.b == doctest::Approx(0.0));

  // Reference CIELAB (D65) of sRGB red.
  const auto red = rgb_to_lab(255, 0, 0);
  CHECK(std::abs(red.l - 53.24) < 0.01);
  CHECK(std::abs(red.a - 80.09) < 0.01);
  CHECK(std::abs(red.b - 67.20) < 0.01);
}

TEST_CASE("patch_grid counts and ordering") {
  auto count_by_loop = [](int w, int h) {
    int n = 0;
    for (int y = 0; y + 16 <= h; y += 16) {
      for (int x = 0; x + 16 <= w; x += 16) ++n;
    }
    for (int y = 8; y + 16 <= h; y += 16) {
      for (int x = 8; x + 16 <= w; x += 16) ++n;
    }
    return n;
  };

  PatchLayout layout;
  CHECK(patch_grid(layout).size() == 113);
  CHECK(count_by_loop(128, 128) == 113);

  layout.image_width = 64;
  layout.image_height = 128;
  CHECK(patch_grid(layout).size() == 53);
  CHECK(layout.layer1_count() == 32);
  CHECK(layout.layer2_count() == 21);

  layout.image_width = layout.image_height = 16;
  const auto single = patch_grid(layout);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == Rect{0, 0, 16, 16});

  layout.image_width = layout.image_height = 10;
  CHECK(patch_grid(layout).empty());

  // closed forms for arbitrary sizes
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> dim(16, 300);
  for (int i = 0; i < 200; ++i) {
    PatchLayout l;
    l.image_width = dim(rng);
    l.image_height = dim(rng);
    const int closed = (l.image_width / 16) * (l.image_height / 16) +
                       ((l.image_width - 8) / 16) * ((l.image_height - 8) / 16);
    const auto rects = patch_grid(l);
    CHECK(int(rects.size()) == closed);
    CHECK(int(rects.size()) == count_by_loop(l.image_width, l.image_height));
    for (const auto& r : rects) {
      CHECK(r.x + r.width <= l.image_width);
      CHECK(r.y + r.height <= l.image_height);
    }
  }

  PatchLayout l;
  const auto rects = patch_grid(l);
  CHECK(rects[1] == Rect{16, 0, 16, 16});
  CHECK(rects[8] == Rect{0, 16, 16, 16});
  CHECK(rects[64] == Rect{8, 8, 16, 16});
  l.overlap_layer = false;
  CHECK(patch_grid(l).size() == 64);
}

TEST_CASE("patch_histogram") {
  const auto ones = WeightMask::ones(16, 16);

  SUBCASE("single colour is one-hot") {
    const auto f = patch_histogram(solid(16, 16, 255, 0, 0), ones, {0, 0, 16, 16}, ColorSpace::RGB, false);
    REQUIRE(f.values.size() == 64);
    const int bin = 3 * 16 + 0 * 4 + 0;
    for (int i = 0; i < 64; ++i) CHECK(f.values[std::size_t(i)] == (i == bin ? 1.0 : 0.0));
  }
  SUBCASE("zero mask gives the zero vector") {
    for (auto cs : kColorSpaces) {
      const auto f = patch_histogram(synth::group_image(1, 16), WeightMask(16, 16, 0.0),
                                     {0, 0, 16, 16}, cs, true);
      CHECK(f.is_zero());
      for (double v : f.values) CHECK(v == 0.0);
    }
  }
  SUBCASE("half red half blue") {
    auto img = solid(16, 16, 255, 0, 0);
    for (int y = 8; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) img.set(x, y, 0, 0, 255);
    }
    const auto f = patch_histogram(img, ones, {0, 0, 16, 16}, ColorSpace::RGB, false);
    CHECK(f.values[48] == 0.5);
    CHECK(f.values[3] == 0.5);
  }
  SUBCASE("rect outside image is rejected") {
    CHECK_THROWS_AS(patch_histogram(solid(16, 16, 0, 0, 0), ones, {8, 0, 16, 16}, ColorSpace::HS, false),
                    InvalidArgument);
  }
  SUBCASE("mask of a different size is rejected") {
    CHECK_THROWS_AS(patch_histogram(solid(16, 16, 0, 0, 0), WeightMask::ones(8, 8), {0, 0, 8, 8},
                                    ColorSpace::HS, false),
                    InvalidArgument);
  }
  SUBCASE("spatial variant appends the normalised centre") {
    const auto img = synth::group_image(2);
    const auto f = patch_histogram(img, WeightMask::ones(128, 128), {16, 32, 16, 16}, ColorSpace::Lab, true);
    REQUIRE(f.values.size() == 66);
    CHECK(f.values[64] == doctest::Approx(24.0 / 128.0));
    CHECK(f.values[65] == doctest::Approx(40.0 / 128.0));
  }
}

TEST_CASE("histogram invariants") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> w(0.0, 0.5);

  for (int trial = 0; trial < 10; ++trial) {
    const auto img = synth::group_image(100 + std::uint64_t(trial));
    std::vector<double> weights(128 * 128);
    for (auto& v : weights) v = w(rng);
    WeightMask mask(128, 128, weights);
    for (auto& v : weights) v *= 2.0;
    WeightMask doubled(128, 128, weights);

    const auto a = extract_features(img, mask, false);
    const auto b = extract_features(img, doubled, false);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t p = 0; p < a.per_colorspace[c].size(); ++p) {
        const auto& fa = a.per_colorspace[c][p].values;
        const auto& fb = b.per_colorspace[c][p].values;
        const double sum = std::accumulate(fa.begin(), fa.end(), 0.0);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t i = 0; i < fa.size(); ++i) CHECK(std::abs(fa[i] - fb[i]) < 1e-12);
      }
    }
  }

  SUBCASE("pixel permutation inside a patch") {
    auto img = synth::group_image(5, 16);
    std::vector<std::array<std::uint8_t, 3>> px;
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) px.push_back({img.at(x, y)[0], img.at(x, y)[1], img.at(x, y)[2]});
    }
    std::shuffle(px.begin(), px.end(), rng);
    ImageBuffer shuffled(16, 16);
    for (int i = 0; i < 256; ++i) shuffled.set(i % 16, i / 16, px[std::size_t(i)][0], px[std::size_t(i)][1], px[std::size_t(i)][2]);
    for (auto cs : kColorSpaces) {
      const auto a = patch_histogram(img, WeightMask::ones(16, 16), {0, 0, 16, 16}, cs, false);
      const auto b = patch_histogram(shuffled, WeightMask::ones(16, 16), {0, 0, 16, 16}, cs, false);
      for (int i = 0; i < 64; ++i) CHECK(std::abs(a.values[std::size_t(i)] - b.values[std::size_t(i)]) < 1e-12);
    }
  }
}

TEST_CASE("extract_features") {
  const auto img = synth::group_image(9);
  const auto f = extract_features(img, WeightMask::ones(128, 128), false);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(f.per_colorspace[c].size() == 113);
    CHECK(f.per_colorspace[c][0].colorspace == kColorSpaces[c]);
  }
  CHECK(extract_features(img, WeightMask::ones(128, 128), true)[ColorSpace::HS][0].values.size() == 66);

  SUBCASE("constant image yields identical features") {
    const auto flat = extract_features(solid(128, 128, 30, 160, 90), WeightMask::ones(128, 128), false);
    for (std::size_t c = 0; c < 3; ++c) {
      for (const auto& p : flat.per_colorspace[c]) CHECK(p.values == flat.per_colorspace[c][0].values);
    }
  }

  SUBCASE("block shuffle permutes layer-1 features") {
    synth::Rng rng(4);
    const auto perm = synth::random_permutation(64, rng);
    const auto shuffled = synth::permute_blocks(img, perm);
    const auto g = extract_features(shuffled, WeightMask::ones(128, 128), false, false);
    const auto base = extract_features(img, WeightMask::ones(128, 128), false, false);
    for (std::size_t c = 0; c < 3; ++c) {
      REQUIRE(g.per_colorspace[c].size() == 64);
      for (std::size_t i = 0; i < 64; ++i) {
        CHECK(g.per_colorspace[c][i].values == base.per_colorspace[c][std::size_t(perm[i])].values);
      }
    }
  }

  SUBCASE("patch_histogram agrees with extract_features") {
    PatchLayout layout;
    const auto rects = patch_grid(layout);
    for (auto cs : kColorSpaces) {
      for (std::size_t i : {std::size_t(0), std::size_t(70), std::size_t(112)}) {
        const auto p = patch_histogram(img, WeightMask::ones(128, 128), rects[i], cs, false);
        CHECK(p.values == f[cs][i].values);
      }
    }
  }
}
