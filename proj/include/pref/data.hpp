#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pref/imgproc.hpp"

namespace pref {

enum class DomainRole { Source, Target };

inline constexpr int kSourceWidth = 64;
inline constexpr int kSourceHeight = 128;
inline constexpr int kTargetSize = 128;

struct ManifestRecord {
  std::string image_id;                 // image_path as written in the manifest
  std::filesystem::path image_path;     // resolved against the manifest directory
  std::string id;                       // person or group identity
  std::string camera;
  std::optional<std::filesystem::path> mask_path;
};

struct DatasetManifest {
  std::string name;
  DomainRole role = DomainRole::Target;
  std::vector<ManifestRecord> records;
};

/// Reads a CSV manifest with header `image_path,id,camera,mask_path`.
/// Relative paths resolve against the manifest's directory. Throws
/// ParseError (with the offending line number) on malformed content,
/// missing files or duplicate image paths.
DatasetManifest parse_manifest(const std::filesystem::path& path, DomainRole role);

/// Concatenates manifests of the same role; image ids are prefixed with the
/// manifest name so they stay unique.
DatasetManifest concat_manifests(std::span<const DatasetManifest> parts);

struct LoadedImage {
  ImageBuffer image;
  WeightMask mask;
};

/// Source records load at 128x64 (height x width) with an all-ones mask;
/// target records at 128x128 with their mask resized alongside.
LoadedImage load_record(const ManifestRecord& record, DomainRole role);

}  // namespace pref
