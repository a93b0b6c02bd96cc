#include <algorithm>
#include <numeric>

#include "pref/errors.hpp"
#include "pref/sparse.hpp"

namespace pref {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                    std::uint32_t(stream >> 32)};
  return Rng(seq);
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw InvalidArgument("uniform_index over an empty range");
  const std::uint64_t limit = Rng::max() - Rng::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

double uniform_real(Rng& rng) { return double(rng() >> 11) * 0x1.0p-53; }

namespace {

void project_unit_ball(Eigen::Ref<VectorXd> v) {
  const double n = v.norm();
  if (n > 1.0) v /= n;
}

}  // namespace

Dictionary dict_init(Index k, std::uint64_t seed, const SampleSource& source, double lambda) {
  if (k < 1) throw InvalidArgument("dictionary needs at least one atom");
  const std::size_t n = source.size();
  if (n < 1) throw InvalidArgument("dictionary initialisation needs at least one training vector");
  const Index d = source.dim();
  if (d < 1) throw InvalidArgument("training vectors are empty");

  auto rng = make_rng(seed, 0);
  Dictionary dict;
  dict.atoms.resize(d, k);
  dict.lambda = lambda;
  dict.seed = seed;

  // Partial Fisher-Yates over the sample indices.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t distinct = std::min<std::size_t>(n, std::size_t(k));
  for (std::size_t i = 0; i < distinct; ++i) {
    const std::size_t j = i + std::size_t(uniform_index(rng, n - i));
    std::swap(order[i], order[j]);
  }

  VectorXd v(d);
  for (Index j = 0; j < k; ++j) {
    const bool fresh = std::size_t(j) < distinct;
    source.sample(fresh ? order[std::size_t(j)] : std::size_t(uniform_index(rng, n)), v);
    if (!fresh || v.squaredNorm() == 0.0) {
      const double scale = 1e-3 * std::max(1.0, v.cwiseAbs().maxCoeff());
      for (Index i = 0; i < d; ++i) v(i) += scale * (2.0 * uniform_real(rng) - 1.0);
    }
    project_unit_ball(v);
    dict.atoms.col(j) = v;
  }
  return dict;
}

LearnerState::LearnerState(Dictionary initial)
    : A(MatrixXd::Zero(initial.size(), initial.size())),
      B(MatrixXd::Zero(initial.dim(), initial.size())),
      dict(std::move(initial)) {}

SparseCode learner_step(LearnerState& state, const Eigen::Ref<const VectorXd>& x,
                        const LassoOptions& opts) {
  auto code = lasso_solve(x, state.dict, opts);
  const VectorXd& alpha = code.coefficients;
  state.A.noalias() += alpha * alpha.transpose();
  state.B.noalias() += x * alpha.transpose();

  auto& D = state.dict.atoms;
  VectorXd v(D.rows());
  for (Index j = 0; j < D.cols(); ++j) {
    const double ajj = state.A(j, j);
    if (ajj <= 0.0) continue;
    v.noalias() = state.B.col(j) - D * state.A.col(j);
    v /= ajj;
    v += D.col(j);
    D.col(j) = v / std::max(v.norm(), 1.0);
  }
  ++state.t;
  state.dict.iterations = state.t;
  return code;
}

double empirical_objective(const MatrixXd& samples, const Eigen::Ref<const MatrixXd>& atoms,
                           double lambda) {
  if (samples.cols() == 0) return 0.0;
  double total = 0.0;
  for (Index i = 0; i < samples.cols(); ++i) {
    total += lasso_solve(samples.col(i), atoms, lambda).objective;
  }
  return total / double(samples.cols());
}

LearnResult learn_dictionary(const SampleSource& source, const LearnConfig& cfg,
                             const std::function<void(const Checkpoint&)>& on_checkpoint) {
  const std::size_t n = source.size();
  if (n == 0) throw InvalidArgument("training source is empty");
  if (cfg.iterations < 0) throw InvalidArgument("iteration budget must be non-negative");
  if (!(cfg.lambda > 0.0)) throw InvalidArgument("lambda must be positive");

  // Held-out monitoring subset; carved out of the draws only when enough
  // samples remain for training.
  auto split_rng = make_rng(cfg.seed, 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t held = std::min(cfg.heldout_size, n);
  for (std::size_t i = 0; i < held; ++i) {
    std::swap(order[i], order[i + std::size_t(uniform_index(split_rng, n - i))]);
  }
  MatrixXd heldout(source.dim(), Index(held));
  for (std::size_t i = 0; i < held; ++i) source.sample(order[i], heldout.col(Index(i)));
  const bool exclude = n - held >= held && n > held;
  std::vector<std::size_t> pool(exclude ? order.begin() + std::ptrdiff_t(held) : order.begin(),
                                order.end());
  std::sort(pool.begin(), pool.end());

  LearnerState state(dict_init(cfg.k, cfg.seed, source, cfg.lambda));
  state.dict.colorspace = cfg.colorspace;

  LearnResult result;
  auto checkpoint = [&] {
    Checkpoint cp{state.t, empirical_objective(heldout, state.dict.atoms, cfg.lambda),
                  state.dict.atoms.colwise().norm().maxCoeff()};
    result.checkpoints.push_back(cp);
    if (on_checkpoint) on_checkpoint(cp);
  };
  checkpoint();

  auto draw_rng = make_rng(cfg.seed, 2);
  VectorXd x(source.dim());
  for (long t = 0; t < cfg.iterations; ++t) {
    source.sample(pool[std::size_t(uniform_index(draw_rng, pool.size()))], x);
    learner_step(state, x);
    if (cfg.checkpoint_interval > 0 && state.t % cfg.checkpoint_interval == 0 &&
        state.t != cfg.iterations) {
      checkpoint();
    }
  }
  if (cfg.iterations > 0) checkpoint();

  result.dict = std::move(state.dict);
  result.dict.iterations = cfg.iterations;
  result.dict.seed = cfg.seed;
  return result;
}

}  // namespace pref
