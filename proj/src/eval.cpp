#include "pref/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "pref/errors.hpp"
#include "pref/sparse.hpp"

namespace pref {

std::vector<TrialSplit> make_splits(std::span<const std::string> group_ids, int trials,
                                    std::uint64_t seed) {
  if (group_ids.empty()) throw InvalidArgument("cannot split an empty dataset");
  if (trials < 1) throw InvalidArgument("need at least one trial");

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < group_ids.size(); ++i) groups[group_ids[i]].push_back(i);

  std::vector<TrialSplit> splits;
  for (int t = 0; t < trials; ++t) {
    TrialSplit split;
    split.trial_index = t;
    split.seed = seed;
    auto rng = make_rng(seed, 1000 + std::uint64_t(t));
    std::vector<char> in_gallery(group_ids.size(), 0);
    for (const auto& [id, members] : groups) {
      const auto pick = members[std::size_t(uniform_index(rng, members.size()))];
      split.gallery.push_back(pick);
      in_gallery[pick] = 1;
    }
    for (std::size_t i = 0; i < group_ids.size(); ++i) {
      if (!in_gallery[i]) split.probes.push_back(i);
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

std::vector<double> cmc_curve(std::span<const RankedList> lists,
                              std::span<const std::string> true_ids) {
  if (lists.empty()) throw InvalidArgument("CMC needs at least one probe");
  if (lists.size() != true_ids.size()) throw InvalidArgument("one true id per ranked list required");
  const std::size_t G = lists.front().entries.size();
  std::vector<std::size_t> hits(G, 0);
  for (std::size_t p = 0; p < lists.size(); ++p) {
    const auto& entries = lists[p].entries;
    if (entries.size() != G) throw InvalidArgument("ranked lists differ in length");
    const auto it = std::find_if(entries.begin(), entries.end(),
                                 [&](const RankedEntry& e) { return e.gallery_id == true_ids[p]; });
    if (it == entries.end()) {
      throw InvalidArgument("true match '" + true_ids[p] + "' missing from the gallery");
    }
    ++hits[std::size_t(it - entries.begin())];
  }
  std::vector<double> cmc(G);
  std::size_t acc = 0;
  for (std::size_t r = 0; r < G; ++r) {
    acc += hits[r];
    cmc[r] = double(acc) / double(lists.size());
  }
  return cmc;
}

double nauc(std::span<const double> cmc) {
  if (cmc.empty()) throw InvalidArgument("empty CMC");
  double s = 0.0;
  for (double v : cmc) s += v;
  return s / double(cmc.size());
}

EvalReport evaluate_protocol(std::span<const EncodedImage> images, const ProtocolOptions& opts,
                             std::vector<RankedList>* rankings) {
  std::vector<const EncodedImage*> valid;
  std::vector<std::string> groups;
  EvalReport report;
  for (const auto& img : images) {
    if (!img.valid) {
      ++report.excluded;
      continue;
    }
    valid.push_back(&img);
    groups.push_back(img.group_id);
  }
  if (valid.empty()) throw InvalidArgument("no encodable images to evaluate");

  const auto splits = make_splits(groups, opts.trials, opts.seed);
  std::size_t G = 0;
  for (const auto& split : splits) {
    std::vector<GroupSignature> sigs;

    if (opts.gallery_pca_dim) {
      PcaSet pca;
      for (std::size_t c = 0; c < kColorSpaces.size(); ++c) {
        Eigen::MatrixXd samples(valid.front()->pooled[c].size(), Eigen::Index(split.gallery.size()));
        for (std::size_t g = 0; g < split.gallery.size(); ++g) {
          samples.col(Eigen::Index(g)) = valid[split.gallery[g]]->pooled[c];
        }
        pca[c] = pca_fit(samples, *opts.gallery_pca_dim);
        pca[c].colorspace = kColorSpaces[c];
      }
      sigs.reserve(valid.size());
      for (const auto* img : valid) sigs.push_back(project(img->pooled, pca));
    }
    auto sig_of = [&](std::size_t i) -> const GroupSignature& {
      return opts.gallery_pca_dim ? sigs[i] : valid[i]->signature;
    };

    Gallery gallery;
    for (auto g : split.gallery) gallery.emplace_back(valid[g]->group_id, sig_of(g));
    G = gallery.size();

    std::vector<RankedList> lists;
    std::vector<std::string> truth;
    for (auto p : split.probes) {
      lists.push_back(rank_gallery(valid[p]->image_id, sig_of(p), gallery, opts.channel));
      truth.push_back(valid[p]->group_id);
    }
    if (lists.empty()) throw InvalidArgument("every group has a single image; no probes");
    report.trial_cmc.push_back(cmc_curve(lists, truth));
    report.trial_probes.push_back(lists.size());
    if (rankings) {
      rankings->insert(rankings->end(), std::make_move_iterator(lists.begin()),
                       std::make_move_iterator(lists.end()));
    }
  }

  // Probe-weighted mean over trials, plus the spread across trials.
  std::size_t total = 0;
  for (auto n : report.trial_probes) total += n;
  report.mean_cmc.assign(G, 0.0);
  report.stddev_cmc.assign(G, 0.0);
  for (std::size_t t = 0; t < report.trial_cmc.size(); ++t) {
    const double n = double(report.trial_probes[t]);
    for (std::size_t r = 0; r < G; ++r) report.mean_cmc[r] += n * report.trial_cmc[t][r];
  }
  for (auto& v : report.mean_cmc) v /= double(total);
  if (report.trial_cmc.size() > 1) {
    for (std::size_t r = 0; r < G; ++r) {
      double ss = 0.0;
      for (const auto& cmc : report.trial_cmc) ss += (cmc[r] - report.mean_cmc[r]) * (cmc[r] - report.mean_cmc[r]);
      report.stddev_cmc[r] = std::sqrt(ss / double(report.trial_cmc.size() - 1));
    }
  }
  for (int r : kReportedRanks) report.rank_accuracy[r] = report.mean_cmc[std::min<std::size_t>(std::size_t(r), G) - 1];
  report.nauc = nauc(report.mean_cmc);
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j;
  j["trial_cmc"] = report.trial_cmc;
  j["trial_probes"] = report.trial_probes;
  j["mean_cmc"] = report.mean_cmc;
  j["stddev_cmc"] = report.stddev_cmc;
  nlohmann::json ranks = nlohmann::json::object();
  for (const auto& [r, acc] : report.rank_accuracy) ranks["rank" + std::to_string(r)] = acc;
  j["rank_accuracy"] = ranks;
  j["nauc"] = report.nauc;
  j["nauc_percent"] = 100.0 * report.nauc;
  j["gallery_size"] = report.mean_cmc.size();
  j["trials"] = report.trial_cmc.size();
  j["excluded_images"] = report.excluded;
  j["config"] = report.config;
  return j;
}

void write_cmc_csv(std::ostream& os, const EvalReport& report) {
  os << "rank,mean_accuracy,stddev\n";
  const auto old = os.precision(17);
  for (std::size_t r = 0; r < report.mean_cmc.size(); ++r) {
    os << r + 1 << ',' << report.mean_cmc[r] << ',' << report.stddev_cmc[r] << '\n';
  }
  os.precision(old);
}

std::string summary_line(const EvalReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "rank-1 %.1f  rank-5 %.1f  rank-10 %.1f  rank-25 %.1f  nAUC %.1f",
                100.0 * report.rank_accuracy.at(1), 100.0 * report.rank_accuracy.at(5),
                100.0 * report.rank_accuracy.at(10), 100.0 * report.rank_accuracy.at(25),
                100.0 * report.nauc);
  return buf;
}

}  // namespace pref
