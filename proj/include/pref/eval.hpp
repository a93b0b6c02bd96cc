#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pref/encode.hpp"
#include "pref/match.hpp"

namespace pref {

inline constexpr int kDefaultTrials = 10;
inline constexpr std::array<int, 4> kReportedRanks = {1, 5, 10, 25};

/// One single-vs-single shot split. Indices refer to the image list the
/// split was drawn from.
struct TrialSplit {
  int trial_index = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> gallery;  // one image per group, groups in id order
  std::vector<std::size_t> probes;   // every other image, in input order
};

/// `group_ids[i]` is the group of image i. Groups with a single image always
/// land in the gallery and contribute no probe.
std::vector<TrialSplit> make_splits(std::span<const std::string> group_ids, int trials,
                                    std::uint64_t seed);

/// CMC over ranks 1..G, where G is the ranked-list length.
std::vector<double> cmc_curve(std::span<const RankedList> lists,
                              std::span<const std::string> true_ids);

/// Mean of the CMC over all ranks.
double nauc(std::span<const double> cmc);

struct EvalReport {
  std::vector<std::vector<double>> trial_cmc;
  std::vector<std::size_t> trial_probes;
  std::vector<double> mean_cmc;
  std::vector<double> stddev_cmc;
  std::map<int, double> rank_accuracy;
  double nauc = 0.0;
  std::size_t excluded = 0;
  nlohmann::json config;
};

/// An image after encoding. `pooled` is only needed when PCA is refit per
/// trial; `valid` is false for images that could not be encoded.
struct EncodedImage {
  std::string image_id;
  std::string group_id;
  bool valid = true;
  GroupSignature signature;
  PooledEncoding pooled;
};

struct ProtocolOptions {
  int trials = kDefaultTrials;
  std::uint64_t seed = 0;
  std::optional<ColorSpace> channel;
  // Refit PCA on each trial's gallery encodings instead of using the
  // precomputed signatures.
  std::optional<Eigen::Index> gallery_pca_dim;
};

EvalReport evaluate_protocol(std::span<const EncodedImage> images, const ProtocolOptions& opts,
                             std::vector<RankedList>* rankings = nullptr);

nlohmann::json to_json(const EvalReport& report);
void write_cmc_csv(std::ostream& os, const EvalReport& report);
std::string summary_line(const EvalReport& report);

}  // namespace pref
