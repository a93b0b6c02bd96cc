#include "pref/data.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pref/errors.hpp"
#include "pref/image_io.hpp"

namespace pref {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

[[noreturn]] void fail(const fs::path& path, std::size_t line, const std::string& what) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

DatasetManifest parse_manifest(const fs::path& path, DomainRole role) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest " + path.string());

  DatasetManifest manifest;
  manifest.name = path.stem().string();
  manifest.role = role;
  const fs::path base = path.parent_path();

  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::set<fs::path> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 3 || fields.size() > 4 || fields[0] != "image_path" ||
          fields[1] != "id" || fields[2] != "camera" ||
          (fields.size() == 4 && fields[3] != "mask_path")) {
        fail(path, lineno, "expected header 'image_path,id,camera,mask_path'");
      }
      continue;
    }
    if (fields.size() < 3 || fields.size() > 4) {
      fail(path, lineno, "expected 3 or 4 fields, got " + std::to_string(fields.size()));
    }
    ManifestRecord rec;
    rec.image_id = fields[0];
    rec.id = fields[1];
    rec.camera = fields[2];
    if (rec.image_id.empty()) fail(path, lineno, "empty image_path");
    if (rec.id.empty()) fail(path, lineno, "empty id");

    rec.image_path = (base / rec.image_id).lexically_normal();
    if (!fs::is_regular_file(rec.image_path)) {
      fail(path, lineno, "image not found: " + rec.image_path.string());
    }
    if (!seen.insert(rec.image_path).second) {
      fail(path, lineno, "duplicate image_path '" + rec.image_id + "'");
    }
    if (fields.size() == 4 && !fields[3].empty()) {
      rec.mask_path = (base / fields[3]).lexically_normal();
      if (!fs::is_regular_file(*rec.mask_path)) {
        fail(path, lineno, "mask not found: " + rec.mask_path->string());
      }
    }
    manifest.records.push_back(std::move(rec));
  }
  if (!header_seen) throw ParseError(path.string() + ":1: empty manifest");
  if (manifest.records.empty()) fail(path, lineno, "manifest has no records");
  return manifest;
}

DatasetManifest concat_manifests(std::span<const DatasetManifest> parts) {
  if (parts.empty()) throw InvalidArgument("no manifests to concatenate");
  if (parts.size() == 1) return parts.front();

  DatasetManifest out;
  out.role = parts.front().role;
  std::set<fs::path> seen;
  for (const auto& part : parts) {
    if (part.role != out.role) throw InvalidArgument("cannot mix source and target manifests");
    out.name += (out.name.empty() ? "" : "+") + part.name;
    for (auto rec : part.records) {
      if (!seen.insert(rec.image_path).second) {
        throw ParseError("image " + rec.image_path.string() + " listed in more than one manifest");
      }
      rec.image_id = part.name + "/" + rec.image_id;
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

LoadedImage load_record(const ManifestRecord& record, DomainRole role) {
  const ImageBuffer raw = load_image(record.image_path);
  if (role == DomainRole::Source) {
    auto img = resize_image(raw, kSourceWidth, kSourceHeight);
    return {std::move(img), WeightMask::ones(kSourceWidth, kSourceHeight)};
  }

  auto img = resize_image(raw, kTargetSize, kTargetSize);
  if (!record.mask_path) return {std::move(img), WeightMask::ones(kTargetSize, kTargetSize)};

  auto mask = load_mask(*record.mask_path);
  if (mask.width() != raw.width() || mask.height() != raw.height()) {
    throw IoError("mask " + record.mask_path->string() + " is " + std::to_string(mask.width()) +
                  "x" + std::to_string(mask.height()) + " but image is " +
                  std::to_string(raw.width()) + "x" + std::to_string(raw.height()));
  }
  return {std::move(img), resize_mask(mask, kTargetSize, kTargetSize)};
}

}  // namespace pref
