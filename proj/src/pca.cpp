#include <Eigen/Eigenvalues>
#include <string>

#include "pref/encode.hpp"
#include "pref/errors.hpp"

namespace pref {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

PcaModel pca_fit(const Eigen::Ref<const MatrixXd>& samples, Index u) {
  const Index k = samples.rows();
  const Index n = samples.cols();
  if (u < 1) throw InvalidArgument("PCA output dimension must be positive");
  if (u > k) throw InvalidArgument("PCA output dimension exceeds input dimension");
  if (n < u + 1) {
    throw InvalidArgument("PCA with " + std::to_string(u) + " components needs at least " +
                          std::to_string(u + 1) + " samples, got " + std::to_string(n));
  }

  PcaModel model;
  model.mean = samples.rowwise().mean();
  const MatrixXd centered = samples.colwise() - model.mean;
  const MatrixXd cov = (centered * centered.transpose()) / double(n - 1);

  // Eigenvalues come back ascending.
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("PCA eigendecomposition failed");

  model.components.resize(u, k);
  model.explained_variance.resize(u);
  for (Index i = 0; i < u; ++i) {
    VectorXd v = eig.eigenvectors().col(k - 1 - i);
    Index largest = 0;
    v.cwiseAbs().maxCoeff(&largest);
    if (v(largest) < 0.0) v = -v;
    model.components.row(i) = v.transpose();
    model.explained_variance(i) = std::max(0.0, eig.eigenvalues()(k - 1 - i));
  }
  return model;
}

VectorXd pca_transform(const PcaModel& model, const Eigen::Ref<const VectorXd>& f) {
  if (f.size() != model.input_dim()) {
    throw InvalidArgument("PCA input has dimension " + std::to_string(f.size()) + ", expected " +
                          std::to_string(model.input_dim()));
  }
  return model.components * (f - model.mean);
}

}  // namespace pref
