#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "pref/imgproc.hpp"
#include "pref/sparse.hpp"

namespace pref {

enum class ResidualMetric { L1, Cosine, ChiSquare, Euclidean };
enum class Pooling { Max, Average };

inline constexpr std::array<ResidualMetric, 4> kResidualMetrics = {
    ResidualMetric::L1, ResidualMetric::Cosine, ResidualMetric::ChiSquare,
    ResidualMetric::Euclidean};
inline constexpr std::array<Pooling, 2> kPoolings = {Pooling::Max, Pooling::Average};

std::string_view to_string(ResidualMetric m);
std::string_view to_string(Pooling p);
ResidualMetric parse_metric(std::string_view name);
Pooling parse_pooling(std::string_view name);

struct ResidualConfig {
  ResidualMetric metric = ResidualMetric::Cosine;
  Pooling pooling = Pooling::Average;
  double chi_square_epsilon = 1e-10;
};

/// Non-negative dissimilarity between a feature and an atom.
double residual(const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& atom, ResidualMetric metric,
                double chi_square_epsilon = 1e-10);

/// Sparse code of x with each coefficient scaled by the residual to its atom.
Eigen::VectorXd encode_patch(const Eigen::Ref<const Eigen::VectorXd>& x, const Dictionary& dict,
                             const ResidualConfig& cfg);

Eigen::VectorXd pool(std::span<const Eigen::VectorXd> encodings, Pooling pooling);

/// Pooled k-vector per colorspace, in kColorSpaces order.
using PooledEncoding = std::array<Eigen::VectorXd, 3>;

struct PcaModel {
  Eigen::VectorXd mean;           // k
  Eigen::MatrixXd components;     // u x k, orthonormal rows
  Eigen::VectorXd explained_variance;  // u, descending
  ColorSpace colorspace = ColorSpace::HS;

  Eigen::Index input_dim() const { return mean.size(); }
  Eigen::Index output_dim() const { return components.rows(); }
};

/// Samples are the columns of `samples`.
PcaModel pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& samples, Eigen::Index u);
Eigen::VectorXd pca_transform(const PcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& f);

struct GroupSignature {
  // kColorSpaces order; an empty vector marks an absent channel.
  std::array<Eigen::VectorXd, 3> channels;

  const Eigen::VectorXd& operator[](ColorSpace cs) const {
    return channels[std::size_t(cs)];
  }
  Eigen::VectorXd& operator[](ColorSpace cs) { return channels[std::size_t(cs)]; }
};

struct EncoderConfig {
  ResidualConfig residual;
  bool spatial = false;
  bool overlap_layer = true;
};

using DictionarySet = std::array<Dictionary, 3>;
using PcaSet = std::array<PcaModel, 3>;

/// Features -> per-patch residual codes -> pooling, per colorspace. Patches
/// with an all-zero histogram are skipped; DegenerateInput when none remain.
PooledEncoding pooled_encoding(const ImageBuffer& img, const WeightMask& mask,
                               const DictionarySet& dicts, const EncoderConfig& cfg);

GroupSignature project(const PooledEncoding& pooled, const PcaSet& pca);

GroupSignature encode_image(const ImageBuffer& img, const WeightMask& mask,
                            const DictionarySet& dicts, const PcaSet& pca,
                            const EncoderConfig& cfg);

}  // namespace pref
