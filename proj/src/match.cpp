#include "pref/match.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pref/errors.hpp"

namespace pref {

double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw InvalidArgument("cosine distance operands differ in length");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  return std::clamp(1.0 - a.dot(b) / (na * nb), 0.0, 2.0);
}

double fuse_distance(const GroupSignature& a, const GroupSignature& b,
                     std::optional<ColorSpace> only) {
  if (only) {
    const auto& va = a[*only];
    const auto& vb = b[*only];
    if (va.size() == 0 || vb.size() == 0) throw InvalidArgument("signature lacks the requested channel");
    return cosine_distance(va, vb);
  }
  double product = 1.0;
  for (std::size_t c = 0; c < kColorSpaces.size(); ++c) {
    const bool has_a = a.channels[c].size() > 0;
    const bool has_b = b.channels[c].size() > 0;
    if (has_a != has_b) throw InvalidArgument("signatures carry different colorspace sets");
    if (has_a) product *= cosine_distance(a.channels[c], b.channels[c]);
  }
  return product;
}

RankedList rank_gallery(const std::string& probe_id, const GroupSignature& probe,
                        const Gallery& gallery, std::optional<ColorSpace> only) {
  if (gallery.empty()) throw InvalidArgument("cannot rank against an empty gallery");
  RankedList out;
  out.probe_id = probe_id;
  out.entries.reserve(gallery.size());
  for (const auto& [id, sig] : gallery) out.entries.push_back({id, fuse_distance(probe, sig, only)});
  std::sort(out.entries.begin(), out.entries.end(), [](const RankedEntry& l, const RankedEntry& r) {
    if (l.score != r.score) return l.score < r.score;
    return l.gallery_id < r.gallery_id;
  });
  return out;
}

void write_rankings_csv(std::ostream& os, const std::vector<RankedList>& lists) {
  os << "probe_id,rank,gallery_id,score\n";
  const auto old = os.precision(17);
  for (const auto& list : lists) {
    for (std::size_t r = 0; r < list.entries.size(); ++r) {
      os << list.probe_id << ',' << r + 1 << ',' << list.entries[r].gallery_id << ','
         << list.entries[r].score << '\n';
    }
  }
  os.precision(old);
}

}  // namespace pref
