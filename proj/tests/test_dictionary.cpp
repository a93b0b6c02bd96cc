#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "pref/errors.hpp"
#include "pref/sparse.hpp"
#include "synthetic.hpp"

using namespace pref;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

bool atoms_feasible(const MatrixXd& D) {
  for (Eigen::Index j = 0; j < D.cols(); ++j) {
    if (D.col(j).norm() > 1.0 + 1e-9) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("seeded helpers are reproducible") {
  auto a = make_rng(42, 3), b = make_rng(42, 3), c = make_rng(42, 4);
  CHECK(a() == b());
  CHECK(a() != c());
  for (int i = 0; i < 1000; ++i) {
    CHECK(uniform_index(a, 7) < 7);
    const double u = uniform_real(a);
    CHECK((u >= 0.0 && u < 1.0));
  }
  CHECK_THROWS_AS(uniform_index(a, 0), InvalidArgument);
}

TEST_CASE("dict_init") {
  synth::Rng rng(1);
  MatrixSource unit(synth::unit_columns(10, 30, rng));

  SUBCASE("columns are sampled training vectors inside the unit ball") {
    const auto dict = dict_init(12, 5, unit);
    CHECK(dict.dim() == 10);
    CHECK(dict.size() == 12);
    CHECK(atoms_feasible(dict.atoms));
    for (Eigen::Index j = 0; j < dict.size(); ++j) {
      bool found = false;
      for (Eigen::Index i = 0; i < 30; ++i) found = found || dict.atoms.col(j) == unit.matrix().col(i);
      CHECK(found);
    }
  }
  SUBCASE("same seed, same dictionary") {
    CHECK(dict_init(12, 5, unit).atoms == dict_init(12, 5, unit).atoms);
    CHECK(dict_init(12, 5, unit).atoms != dict_init(12, 6, unit).atoms);
  }
  SUBCASE("more atoms than samples") {
    MatrixSource big(synth::gaussian(4, 3, rng) * 10.0);
    const auto dict = dict_init(9, 2, big);
    CHECK(dict.size() == 9);
    CHECK(atoms_feasible(dict.atoms));
    for (Eigen::Index j = 0; j < 9; ++j) CHECK(dict.atoms.col(j).norm() > 0.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(dict_init(3, 0, MatrixSource(MatrixXd(4, 0))), InvalidArgument);
    CHECK_THROWS_AS(dict_init(0, 0, unit), InvalidArgument);
  }
}

TEST_CASE("learner_step") {
  SUBCASE("one-hot code replaces the atom by the sample") {
    Dictionary init;
    init.atoms = MatrixXd::Identity(3, 3);
    LearnerState state(init);
    VectorXd x(3);
    x << 1.1, 0.0, 0.0;
    const auto code = learner_step(state, x);
    CHECK(code.coefficients(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(code.coefficients.tail(2).isZero(0.0));
    CHECK((state.dict.atoms.col(0) - x / std::max(x.norm(), 1.0)).norm() < 1e-12);
    CHECK(state.dict.atoms.col(1) == init.atoms.col(1));
    CHECK(state.dict.atoms.col(2) == init.atoms.col(2));
    CHECK(state.t == 1);
  }
  SUBCASE("zero code leaves everything but t untouched") {
    synth::Rng rng(2);
    Dictionary init;
    init.atoms = synth::unit_columns(5, 4, rng);
    LearnerState state(init);
    learner_step(state, VectorXd::Zero(5));
    CHECK(state.A.isZero(0.0));
    CHECK(state.B.isZero(0.0));
    CHECK(state.dict.atoms == init.atoms);
    CHECK(state.t == 1);
  }
  SUBCASE("two steps follow the hand-unrolled recursion") {
    synth::Rng rng(3);
    Dictionary init;
    init.atoms = synth::unit_columns(2, 2, rng);
    const MatrixXd xs = synth::gaussian(2, 2, rng);
    const double lambda = init.lambda;

    // reference: plain loops over the accumulator recursion
    double D[2][2], A[2][2] = {{0, 0}, {0, 0}}, B[2][2] = {{0, 0}, {0, 0}};
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) D[r][c] = init.atoms(r, c);
    }
    for (int t = 0; t < 2; ++t) {
      MatrixXd Dm(2, 2);
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) Dm(r, c) = D[r][c];
      }
      const VectorXd a = oracle::lasso_by_enumeration(xs.col(t), Dm, lambda).alpha;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          A[i][j] += a(i) * a(j);
          B[i][j] += xs(i, t) * a(j);
        }
      }
      for (int j = 0; j < 2; ++j) {
        if (A[j][j] <= 0.0) continue;
        double v[2];
        for (int r = 0; r < 2; ++r) {
          const double Da = D[r][0] * A[0][j] + D[r][1] * A[1][j];
          v[r] = (B[r][j] - Da) / A[j][j] + D[r][j];
        }
        const double scale = std::max(std::sqrt(v[0] * v[0] + v[1] * v[1]), 1.0);
        for (int r = 0; r < 2; ++r) D[r][j] = v[r] / scale;
      }
    }

    LearnerState state(init);
    learner_step(state, xs.col(0));
    learner_step(state, xs.col(1));
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        CHECK(state.dict.atoms(r, c) == doctest::Approx(D[r][c]).epsilon(1e-10));
        CHECK(state.A(r, c) == doctest::Approx(A[r][c]).epsilon(1e-10));
        CHECK(state.B(r, c) == doctest::Approx(B[r][c]).epsilon(1e-10));
      }
    }
  }
  SUBCASE("feasibility and PSD accumulators over many steps") {
    synth::Rng rng(4);
    const auto planted = synth::planted_dictionary(8, 12, 2, 400, 9);
    MatrixSource src(planted.samples);
    LearnerState state(dict_init(12, 1, src));
    for (Eigen::Index i = 0; i < planted.samples.cols(); ++i) {
      learner_step(state, planted.samples.col(i));
      REQUIRE(atoms_feasible(state.dict.atoms));
    }
    CHECK((state.A - state.A.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(state.A);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("learn_dictionary") {
  const auto planted = synth::planted_dictionary(6, 8, 2, 300, 5);
  MatrixSource src(planted.samples);
  LearnConfig cfg;
  cfg.k = 8;
  cfg.seed = 3;
  cfg.heldout_size = 50;
  cfg.checkpoint_interval = 50;

  SUBCASE("T = 0 returns the initialisation") {
    cfg.iterations = 0;
    const auto res = learn_dictionary(src, cfg);
    CHECK(res.dict.atoms == dict_init(8, 3, src).atoms);
    REQUIRE(res.checkpoints.size() == 1);
    CHECK(res.checkpoints[0].t == 0);
  }
  SUBCASE("deterministic for a fixed seed") {
    cfg.iterations = 400;
    const auto a = learn_dictionary(src, cfg);
    const auto b = learn_dictionary(src, cfg);
    CHECK(a.dict.atoms == b.dict.atoms);
    CHECK(a.dict.iterations == 400);
    CHECK(a.checkpoints.size() == 9);
    CHECK(a.checkpoints.back().t == 400);
    CHECK(a.checkpoints.back().objective < a.checkpoints.front().objective);
    cfg.seed = 4;
    CHECK(learn_dictionary(src, cfg).dict.atoms != a.dict.atoms);
  }
  SUBCASE("empty source") {
    CHECK_THROWS_AS(learn_dictionary(MatrixSource(MatrixXd(6, 0)), cfg), InvalidArgument);
  }
  SUBCASE("checkpoint callback sees every checkpoint") {
    cfg.iterations = 100;
    int calls = 0;
    const auto res = learn_dictionary(src, cfg, [&](const Checkpoint&) { ++calls; });
    CHECK(calls == int(res.checkpoints.size()));
  }
}
