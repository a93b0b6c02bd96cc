#pragma once

#include <filesystem>

#include "pref/imgproc.hpp"

namespace pref {

/// Decodes a PNG or JPEG file into 8-bit sRGB. Throws IoError on failure.
ImageBuffer load_image(const std::filesystem::path& path);

/// Decodes an 8-bit grayscale mask; each value v maps to weight v/255.
WeightMask load_mask(const std::filesystem::path& path);

void save_image(const std::filesystem::path& path, const ImageBuffer& img);
void save_mask(const std::filesystem::path& path, const WeightMask& mask);

}  // namespace pref
