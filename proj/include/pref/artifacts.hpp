#pragma once

// On-disk artifacts. Each one is a JSON header plus a sibling `.bin` file of
// little-endian float32 values.
//
//   dict_<CS>.json       {format_version, colorspace, d, k, lambda, seed, iterations}
//   dict_<CS>.bin        d*k floats, column-major (atom contiguous)
//   pca_<CS>.json        {format_version, colorspace, k, u}
//   pca_<CS>.bin         mean (k floats) then components row-major (u*k floats)
//   signatures.json      {format_version, u, colorspaces, image_ids, group_ids, excluded_ids}
//   signatures.bin       3*u floats per image, colorspaces in header order
//   <name>_pooled.json   {format_version, k, colorspaces, image_ids, group_ids}
//   <name>_pooled.bin    3*k floats per image

#include <filesystem>
#include <string>
#include <vector>

#include "pref/encode.hpp"

namespace pref {

inline constexpr int kFormatVersion = 1;

std::filesystem::path dictionary_header_path(const std::filesystem::path& dir, ColorSpace cs);
std::filesystem::path pca_header_path(const std::filesystem::path& dir, ColorSpace cs);

void write_dictionary(const std::filesystem::path& dir, const Dictionary& dict);
Dictionary read_dictionary(const std::filesystem::path& dir, ColorSpace cs);

void write_pca(const std::filesystem::path& dir, const PcaModel& model);
PcaModel read_pca(const std::filesystem::path& dir, ColorSpace cs);

struct SignatureTable {
  Eigen::Index u = 0;
  std::vector<std::string> image_ids;
  std::vector<std::string> group_ids;
  std::vector<std::string> excluded_ids;
  std::vector<GroupSignature> signatures;
};

void write_signatures(const std::filesystem::path& dir, const SignatureTable& table);
SignatureTable read_signatures(const std::filesystem::path& dir);

struct PooledTable {
  Eigen::Index k = 0;
  std::vector<std::string> image_ids;
  std::vector<std::string> group_ids;
  std::vector<PooledEncoding> pooled;
};

void write_pooled(const std::filesystem::path& dir, const std::string& name,
                  const PooledTable& table);
PooledTable read_pooled(const std::filesystem::path& dir, const std::string& name);

/// Raw float32 little-endian blob helpers.
void write_f32(const std::filesystem::path& path, const std::vector<float>& values);
std::vector<float> read_f32(const std::filesystem::path& path);

}  // namespace pref
