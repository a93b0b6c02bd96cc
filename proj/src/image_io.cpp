#include "pref/image_io.hpp"

#include <cmath>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "pref/errors.hpp"

namespace pref {

ImageBuffer load_image(const std::filesystem::path& path) {
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot decode image " + path.string());

  ImageBuffer img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) img.set(x, y, row[x][2], row[x][1], row[x][0]);
  }
  return img;
}

WeightMask load_mask(const std::filesystem::path& path) {
  const cv::Mat gray = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (gray.empty()) throw IoError("cannot decode mask " + path.string());

  std::vector<double> w(std::size_t(gray.cols) * gray.rows);
  for (int y = 0; y < gray.rows; ++y) {
    const auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < gray.cols; ++x) w[std::size_t(y) * gray.cols + x] = row[x] / 255.0;
  }
  return WeightMask(gray.cols, gray.rows, std::move(w));
}

void save_image(const std::filesystem::path& path, const ImageBuffer& img) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) {
      const auto* p = img.at(x, y);
      row[x] = cv::Vec3b(p[2], p[1], p[0]);
    }
  }
  if (!cv::imwrite(path.string(), bgr)) throw IoError("cannot write image " + path.string());
}

void save_mask(const std::filesystem::path& path, const WeightMask& mask) {
  cv::Mat gray(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) {
      row[x] = std::uint8_t(std::lround(mask.at(x, y) * 255.0));
    }
  }
  if (!cv::imwrite(path.string(), gray)) throw IoError("cannot write mask " + path.string());
}

}  // namespace pref
