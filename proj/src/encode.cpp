#include "pref/encode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pref/errors.hpp"

namespace pref {

using Eigen::Index;
using Eigen::VectorXd;

std::string_view to_string(ResidualMetric m) {
  switch (m) {
    case ResidualMetric::L1: return "l1";
    case ResidualMetric::Cosine: return "cosine";
    case ResidualMetric::ChiSquare: return "chisquare";
    case ResidualMetric::Euclidean: return "euclidean";
  }
  return "?";
}

std::string_view to_string(Pooling p) { return p == Pooling::Max ? "max" : "avg"; }

ResidualMetric parse_metric(std::string_view name) {
  for (auto m : kResidualMetrics) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown residual metric '" + std::string(name) + "'");
}

Pooling parse_pooling(std::string_view name) {
  if (name == "max") return Pooling::Max;
  if (name == "avg" || name == "average") return Pooling::Average;
  throw ConfigError("unknown pooling '" + std::string(name) + "'");
}

double residual(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& atom,
                ResidualMetric metric, double chi_square_epsilon) {
  if (x.size() != atom.size()) throw InvalidArgument("residual operands differ in length");
  switch (metric) {
    case ResidualMetric::L1:
      return (x - atom).lpNorm<1>();
    case ResidualMetric::Euclidean:
      return (x - atom).norm();
    case ResidualMetric::Cosine: {
      const double nx = x.norm(), na = atom.norm();
      if (nx == 0.0 || na == 0.0) return 1.0;
      return std::max(0.0, 1.0 - x.dot(atom) / (nx * na));
    }
    case ResidualMetric::ChiSquare: {
      if (!(chi_square_epsilon > 0.0)) throw InvalidArgument("chi-square epsilon must be positive");
      double s = 0.0;
      for (Index i = 0; i < x.size(); ++i) {
        const double diff = x(i) - atom(i);
        s += diff * diff / (std::abs(x(i) + atom(i)) + chi_square_epsilon);
      }
      return 0.5 * s;
    }
  }
  return 0.0;
}

VectorXd encode_patch(const Eigen::Ref<const VectorXd>& x, const Dictionary& dict,
                      const ResidualConfig& cfg) {
  const auto code = lasso_solve(x, dict);
  VectorXd out = VectorXd::Zero(dict.size());
  for (Index j = 0; j < dict.size(); ++j) {
    const double a = code.coefficients(j);
    if (a != 0.0) out(j) = a * residual(x, dict.atoms.col(j), cfg.metric, cfg.chi_square_epsilon);
  }
  return out;
}

VectorXd pool(std::span<const VectorXd> encodings, Pooling pooling) {
  if (encodings.empty()) throw InvalidArgument("cannot pool an empty set of encodings");
  VectorXd out = encodings.front();
  for (const auto& e : encodings.subspan(1)) {
    if (e.size() != out.size()) throw InvalidArgument("encodings differ in length");
    if (pooling == Pooling::Max) {
      out = out.cwiseMax(e);
    } else {
      out += e;
    }
  }
  if (pooling == Pooling::Average) out /= double(encodings.size());
  return out;
}

PooledEncoding pooled_encoding(const ImageBuffer& img, const WeightMask& mask,
                               const DictionarySet& dicts, const EncoderConfig& cfg) {
  const auto features = extract_features(img, mask, cfg.spatial, cfg.overlap_layer);
  PooledEncoding pooled;
  for (std::size_t c = 0; c < kColorSpaces.size(); ++c) {
    const auto& dict = dicts[c];
    std::vector<VectorXd> codes;
    for (const auto& f : features.per_colorspace[c]) {
      if (f.is_zero()) continue;
      if (Index(f.values.size()) != dict.dim()) {
        throw ConfigError("feature dimension " + std::to_string(f.values.size()) +
                          " does not match dictionary dimension " + std::to_string(dict.dim()));
      }
      codes.push_back(encode_patch(Eigen::Map<const VectorXd>(f.values.data(), dict.dim()), dict,
                                   cfg.residual));
    }
    if (codes.empty()) throw DegenerateInput("every patch is fully masked");
    pooled[c] = pool(codes, cfg.residual.pooling);
  }
  return pooled;
}

GroupSignature project(const PooledEncoding& pooled, const PcaSet& pca) {
  GroupSignature sig;
  for (std::size_t c = 0; c < kColorSpaces.size(); ++c) {
    sig.channels[c] = pca_transform(pca[c], pooled[c]);
  }
  return sig;
}

GroupSignature encode_image(const ImageBuffer& img, const WeightMask& mask,
                            const DictionarySet& dicts, const PcaSet& pca,
                            const EncoderConfig& cfg) {
  return project(pooled_encoding(img, mask, dicts, cfg), pca);
}

}  // namespace pref
