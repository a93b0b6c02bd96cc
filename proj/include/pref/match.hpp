#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pref/encode.hpp"

namespace pref {

/// 1 - cos(a, b), in [0, 2]; 1 when either vector is zero.
double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b);

/// Product of per-colorspace cosine distances. With `only` set, the distance
/// of that single channel.
double fuse_distance(const GroupSignature& a, const GroupSignature& b,
                     std::optional<ColorSpace> only = std::nullopt);

struct RankedEntry {
  std::string gallery_id;
  double score = 0.0;
};

struct RankedList {
  std::string probe_id;
  std::vector<RankedEntry> entries;  // ascending score, ties by id
};

using Gallery = std::vector<std::pair<std::string, GroupSignature>>;

RankedList rank_gallery(const std::string& probe_id, const GroupSignature& probe,
                        const Gallery& gallery, std::optional<ColorSpace> only = std::nullopt);

/// Debug dump, CSV `probe_id,rank,gallery_id,score` with 1-based ranks.
void write_rankings_csv(std::ostream& os, const std::vector<RankedList>& lists);

}  // namespace pref
