#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "pref/imgproc.hpp"

namespace pref {

inline constexpr double kDefaultLambda = 0.1;
inline constexpr int kDefaultAtoms = 500;
inline constexpr long kDefaultIterations = 100000;

/// d x k matrix of atoms (one per column), each inside the unit l2 ball.
struct Dictionary {
  Eigen::MatrixXd atoms;
  double lambda = kDefaultLambda;
  ColorSpace colorspace = ColorSpace::HS;
  std::uint64_t seed = 0;
  long iterations = 0;

  Eigen::Index dim() const { return atoms.rows(); }
  Eigen::Index size() const { return atoms.cols(); }
};

struct SparseCode {
  Eigen::VectorXd coefficients;
  double objective = 0.0;
  int steps = 0;  // homotopy breakpoints visited
  bool polished = false;
};

struct LassoOptions {
  int max_steps = 0;           // LARS breakpoints; 0 picks 10*(d+k)+100
  int max_sweeps = 100000;     // coordinate-descent fallback
  double kkt_tolerance = 1e-9;
};

/// Exact minimiser of 0.5*|x - D a|^2 + lambda*|a|_1.
///
/// Follows the LARS-lasso homotopy from lambda_max down to lambda, then
/// refits the final support in closed form. If the result does not pass the
/// KKT check at `kkt_tolerance` it is polished by cyclic coordinate descent;
/// SolverFailure is thrown when that also runs out of sweeps.
SparseCode lasso_solve(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::MatrixXd>& atoms, double lambda,
                       const LassoOptions& opts = {});
SparseCode lasso_solve(const Eigen::Ref<const Eigen::VectorXd>& x, const Dictionary& dict,
                       const LassoOptions& opts = {});

double lasso_objective(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::MatrixXd>& atoms,
                       const Eigen::Ref<const Eigen::VectorXd>& alpha, double lambda);

/// Largest violation of the lasso optimality conditions; zero at the optimum.
double kkt_violation(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::MatrixXd>& atoms,
                     const Eigen::Ref<const Eigen::VectorXd>& alpha, double lambda);

double duality_gap(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::MatrixXd>& atoms,
                   const Eigen::Ref<const Eigen::VectorXd>& alpha, double lambda);

// ---------------------------------------------------------------------------
// Training samples

class SampleSource {
public:
  virtual ~SampleSource() = default;
  virtual std::size_t size() const = 0;
  virtual Eigen::Index dim() const = 0;
  virtual void sample(std::size_t i, Eigen::Ref<Eigen::VectorXd> out) const = 0;
};

/// Column-per-sample matrix source.
template <class Scalar>
class DenseSource final : public SampleSource {
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit DenseSource(Matrix samples) : samples_(std::move(samples)) {}

  std::size_t size() const override { return std::size_t(samples_.cols()); }
  Eigen::Index dim() const override { return samples_.rows(); }
  void sample(std::size_t i, Eigen::Ref<Eigen::VectorXd> out) const override {
    out = samples_.col(Eigen::Index(i)).template cast<double>();
  }
  const Matrix& matrix() const { return samples_; }

private:
  Matrix samples_;
};

using MatrixSource = DenseSource<double>;
using FloatMatrixSource = DenseSource<float>;

// ---------------------------------------------------------------------------
// Seeded randomness with platform-independent output.

using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t stream);
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);
double uniform_real(Rng& rng);  // [0,1)

// ---------------------------------------------------------------------------
// Online dictionary learning

/// Draws k training vectors (distinct when k <= N) and projects each onto the
/// unit ball. With k > N the extra columns are resampled with a small seeded
/// perturbation.
Dictionary dict_init(Eigen::Index k, std::uint64_t seed, const SampleSource& source,
                     double lambda = kDefaultLambda);

struct LearnerState {
  Eigen::MatrixXd A;  // k x k, sum of a a^T
  Eigen::MatrixXd B;  // d x k, sum of x a^T
  Dictionary dict;
  long t = 0;

  explicit LearnerState(Dictionary initial);
};

/// One online update: sparse-code x against the current dictionary, fold the
/// code into the sufficient statistics, then one block-coordinate pass over
/// the atoms. Atoms that were never activated are left alone.
SparseCode learner_step(LearnerState& state, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const LassoOptions& opts = {});

/// Mean lasso loss of the samples under a dictionary.
double empirical_objective(const Eigen::MatrixXd& samples,
                           const Eigen::Ref<const Eigen::MatrixXd>& atoms, double lambda);

struct LearnConfig {
  Eigen::Index k = kDefaultAtoms;
  double lambda = kDefaultLambda;
  long iterations = kDefaultIterations;
  std::uint64_t seed = 0;
  std::size_t heldout_size = 500;
  long checkpoint_interval = 1000;
  ColorSpace colorspace = ColorSpace::HS;
};

struct Checkpoint {
  long t = 0;
  double objective = 0.0;
  double max_atom_norm = 0.0;
};

struct LearnResult {
  Dictionary dict;
  std::vector<Checkpoint> checkpoints;
};

/// Runs `iterations` learner steps on uniform seeded draws. A held-out subset
/// (excluded from the draws when the source is large enough) is used to
/// evaluate the objective at t = 0, every `checkpoint_interval` steps and at
/// the end.
LearnResult learn_dictionary(const SampleSource& source, const LearnConfig& cfg,
                             const std::function<void(const Checkpoint&)>& on_checkpoint = {});

}  // namespace pref
