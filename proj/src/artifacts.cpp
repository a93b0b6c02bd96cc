#include "pref/artifacts.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "json.hpp"
#include "pref/errors.hpp"

namespace pref {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path blob_path(const fs::path& header) {
  auto p = header;
  return p.replace_extension(".bin");
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void check_version(const json& j, const fs::path& path) {
  if (j.value("format_version", -1) != kFormatVersion) {
    throw ParseError(path.string() + ": unsupported format_version");
  }
}

std::vector<std::string> colorspace_names() {
  std::vector<std::string> names;
  for (auto cs : kColorSpaces) names.emplace_back(to_string(cs));
  return names;
}

void check_colorspaces(const json& j, const fs::path& path) {
  if (j.at("colorspaces").get<std::vector<std::string>>() != colorspace_names()) {
    throw ParseError(path.string() + ": unexpected colorspace list");
  }
}

std::vector<float> expect_floats(const fs::path& header, std::size_t n) {
  auto values = read_f32(blob_path(header));
  if (values.size() != n) {
    throw ParseError(blob_path(header).string() + ": expected " + std::to_string(n) +
                     " floats, found " + std::to_string(values.size()));
  }
  return values;
}

}  // namespace

void write_f32(const fs::path& path, const std::vector<float>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  std::vector<char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) bytes[4 * i + b] = char((bits >> (8 * b)) & 0xFFu);
  }
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

std::vector<float> read_f32(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), {}};
  if (bytes.size() % 4 != 0) throw ParseError(path.string() + ": length is not a multiple of 4");
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t(bytes[4 * i + b]) << (8 * b);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

fs::path dictionary_header_path(const fs::path& dir, ColorSpace cs) {
  return dir / ("dict_" + std::string(to_string(cs)) + ".json");
}

fs::path pca_header_path(const fs::path& dir, ColorSpace cs) {
  return dir / ("pca_" + std::string(to_string(cs)) + ".json");
}

void write_dictionary(const fs::path& dir, const Dictionary& dict) {
  const auto header = dictionary_header_path(dir, dict.colorspace);
  json j;
  j["format_version"] = kFormatVersion;
  j["colorspace"] = to_string(dict.colorspace);
  j["d"] = dict.dim();
  j["k"] = dict.size();
  j["lambda"] = dict.lambda;
  j["seed"] = dict.seed;
  j["iterations"] = dict.iterations;
  write_json(header, j);

  std::vector<float> blob;
  blob.reserve(std::size_t(dict.atoms.size()));
  for (Eigen::Index c = 0; c < dict.size(); ++c) {
    for (Eigen::Index r = 0; r < dict.dim(); ++r) blob.push_back(float(dict.atoms(r, c)));
  }
  write_f32(blob_path(header), blob);
}

Dictionary read_dictionary(const fs::path& dir, ColorSpace cs) {
  const auto header = dictionary_header_path(dir, cs);
  const json j = read_json(header);
  check_version(j, header);
  Dictionary dict;
  try {
    dict.colorspace = parse_colorspace(j.at("colorspace").get<std::string>());
    dict.lambda = j.at("lambda").get<double>();
    dict.seed = j.at("seed").get<std::uint64_t>();
    dict.iterations = j.at("iterations").get<long>();
    const auto d = j.at("d").get<Eigen::Index>();
    const auto k = j.at("k").get<Eigen::Index>();
    if (dict.colorspace != cs) throw ParseError(header.string() + ": colorspace mismatch");
    if (d < 1 || k < 1) throw ParseError(header.string() + ": invalid dimensions");
    const auto blob = expect_floats(header, std::size_t(d * k));
    dict.atoms.resize(d, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      for (Eigen::Index r = 0; r < d; ++r) dict.atoms(r, c) = blob[std::size_t(c * d + r)];
    }
  } catch (const json::exception& e) {
    throw ParseError(header.string() + ": " + e.what());
  }
  return dict;
}

void write_pca(const fs::path& dir, const PcaModel& model) {
  const auto header = pca_header_path(dir, model.colorspace);
  json j;
  j["format_version"] = kFormatVersion;
  j["colorspace"] = to_string(model.colorspace);
  j["k"] = model.input_dim();
  j["u"] = model.output_dim();
  write_json(header, j);

  std::vector<float> blob;
  for (Eigen::Index i = 0; i < model.input_dim(); ++i) blob.push_back(float(model.mean(i)));
  for (Eigen::Index r = 0; r < model.output_dim(); ++r) {
    for (Eigen::Index c = 0; c < model.input_dim(); ++c) blob.push_back(float(model.components(r, c)));
  }
  write_f32(blob_path(header), blob);
}

PcaModel read_pca(const fs::path& dir, ColorSpace cs) {
  const auto header = pca_header_path(dir, cs);
  const json j = read_json(header);
  check_version(j, header);
  PcaModel model;
  try {
    model.colorspace = parse_colorspace(j.at("colorspace").get<std::string>());
    if (model.colorspace != cs) throw ParseError(header.string() + ": colorspace mismatch");
    const auto k = j.at("k").get<Eigen::Index>();
    const auto u = j.at("u").get<Eigen::Index>();
    if (k < 1 || u < 1) throw ParseError(header.string() + ": invalid dimensions");
    const auto blob = expect_floats(header, std::size_t(k + u * k));
    model.mean.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) model.mean(i) = blob[std::size_t(i)];
    model.components.resize(u, k);
    for (Eigen::Index r = 0; r < u; ++r) {
      for (Eigen::Index c = 0; c < k; ++c) model.components(r, c) = blob[std::size_t(k + r * k + c)];
    }
  } catch (const json::exception& e) {
    throw ParseError(header.string() + ": " + e.what());
  }
  return model;
}

void write_signatures(const fs::path& dir, const SignatureTable& table) {
  const auto header = dir / "signatures.json";
  json j;
  j["format_version"] = kFormatVersion;
  j["u"] = table.u;
  j["colorspaces"] = colorspace_names();
  j["image_ids"] = table.image_ids;
  j["group_ids"] = table.group_ids;
  j["excluded_ids"] = table.excluded_ids;
  write_json(header, j);

  std::vector<float> blob;
  blob.reserve(table.signatures.size() * 3 * std::size_t(table.u));
  for (const auto& sig : table.signatures) {
    for (const auto& v : sig.channels) {
      if (v.size() != table.u) throw InvalidArgument("signature length does not match table u");
      for (Eigen::Index i = 0; i < v.size(); ++i) blob.push_back(float(v(i)));
    }
  }
  write_f32(blob_path(header), blob);
}

SignatureTable read_signatures(const fs::path& dir) {
  const auto header = dir / "signatures.json";
  const json j = read_json(header);
  check_version(j, header);
  SignatureTable table;
  try {
    check_colorspaces(j, header);
    table.u = j.at("u").get<Eigen::Index>();
    table.image_ids = j.at("image_ids").get<std::vector<std::string>>();
    table.group_ids = j.value("group_ids", std::vector<std::string>{});
    table.excluded_ids = j.value("excluded_ids", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ParseError(header.string() + ": " + e.what());
  }
  if (table.group_ids.size() != table.image_ids.size()) {
    throw ParseError(header.string() + ": group_ids and image_ids differ in length");
  }
  const std::size_t n = table.image_ids.size();
  const auto u = std::size_t(table.u);
  const auto blob = expect_floats(header, n * 3 * u);
  table.signatures.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      auto& v = table.signatures[i].channels[c];
      v.resize(table.u);
      for (std::size_t e = 0; e < u; ++e) v(Eigen::Index(e)) = blob[(i * 3 + c) * u + e];
    }
  }
  return table;
}

void write_pooled(const fs::path& dir, const std::string& name, const PooledTable& table) {
  const auto header = dir / (name + "_pooled.json");
  json j;
  j["format_version"] = kFormatVersion;
  j["k"] = table.k;
  j["colorspaces"] = colorspace_names();
  j["image_ids"] = table.image_ids;
  j["group_ids"] = table.group_ids;
  write_json(header, j);

  std::vector<float> blob;
  for (const auto& p : table.pooled) {
    for (const auto& v : p) {
      if (v.size() != table.k) throw InvalidArgument("pooled length does not match table k");
      for (Eigen::Index i = 0; i < v.size(); ++i) blob.push_back(float(v(i)));
    }
  }
  write_f32(blob_path(header), blob);
}

PooledTable read_pooled(const fs::path& dir, const std::string& name) {
  const auto header = dir / (name + "_pooled.json");
  const json j = read_json(header);
  check_version(j, header);
  PooledTable table;
  try {
    check_colorspaces(j, header);
    table.k = j.at("k").get<Eigen::Index>();
    table.image_ids = j.at("image_ids").get<std::vector<std::string>>();
    table.group_ids = j.at("group_ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(header.string() + ": " + e.what());
  }
  const std::size_t n = table.image_ids.size();
  const auto k = std::size_t(table.k);
  const auto blob = expect_floats(header, n * 3 * k);
  table.pooled.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      auto& v = table.pooled[i][c];
      v.resize(table.k);
      for (std::size_t e = 0; e < k; ++e) v(Eigen::Index(e)) = blob[(i * 3 + c) * k + e];
    }
  }
  return table;
}

}  // namespace pref
