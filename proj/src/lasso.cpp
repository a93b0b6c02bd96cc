#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pref/errors.hpp"
#include "pref/sparse.hpp"

namespace pref {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_dims(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const MatrixXd>& atoms) {
  if (x.size() != atoms.rows()) {
    throw InvalidArgument("feature dimension " + std::to_string(x.size()) +
                          " does not match dictionary dimension " +
                          std::to_string(atoms.rows()));
  }
}

// Incrementally maintained Cholesky factor of the active-set Gram matrix.
class ActiveSet {
public:
  ActiveSet(const Eigen::Ref<const MatrixXd>& atoms, Index capacity)
      : atoms_(atoms), L_(capacity, capacity) {}

  Index size() const { return Index(members_.size()); }
  int operator[](Index i) const { return members_[std::size_t(i)]; }
  const std::vector<int>& members() const { return members_; }

  // False when the atom is (numerically) in the span of the active atoms.
  bool add(int j) {
    const Index a = size();
    if (a >= L_.rows()) return false;
    const auto dj = atoms_.col(j);
    const double diag = dj.squaredNorm();
    if (diag <= 0.0) return false;
    VectorXd g(a);
    for (Index i = 0; i < a; ++i) g(i) = atoms_.col(members_[std::size_t(i)]).dot(dj);
    VectorXd z = g;
    if (a > 0) L_.topLeftCorner(a, a).triangularView<Eigen::Lower>().solveInPlace(z);
    const double r2 = diag - z.squaredNorm();
    if (r2 <= 1e-10 * diag) return false;
    L_.row(a).head(a) = z.transpose();
    L_(a, a) = std::sqrt(r2);
    members_.push_back(j);
    return true;
  }

  void remove(Index pos) {
    members_.erase(members_.begin() + pos);
    refactor();
  }

  VectorXd solve(const VectorXd& rhs) const {
    const Index a = size();
    VectorXd w = rhs;
    const auto L = L_.topLeftCorner(a, a);
    L.triangularView<Eigen::Lower>().solveInPlace(w);
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(w);
    return w;
  }

  MatrixXd gather() const {
    MatrixXd DA(atoms_.rows(), size());
    for (Index i = 0; i < size(); ++i) DA.col(i) = atoms_.col(members_[std::size_t(i)]);
    return DA;
  }

private:
  void refactor() {
    auto members = std::move(members_);
    members_.clear();
    for (int j : members) add(j);
  }

  const Eigen::Ref<const MatrixXd>& atoms_;
  MatrixXd L_;
  std::vector<int> members_;
};

// Cyclic coordinate descent from a warm start until the KKT check passes.
void coordinate_descent(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const MatrixXd>& atoms,
                        double lambda, const LassoOptions& opts, VectorXd& alpha) {
  const Index k = atoms.cols();
  const VectorXd norms = atoms.colwise().squaredNorm().transpose();
  VectorXd r = x - atoms * alpha;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    for (Index j = 0; j < k; ++j) {
      if (norms(j) <= 0.0) {
        alpha(j) = 0.0;
        continue;
      }
      const double old = alpha(j);
      const double z = old + atoms.col(j).dot(r) / norms(j);
      const double thr = lambda / norms(j);
      const double next = z > thr ? z - thr : (z < -thr ? z + thr : 0.0);
      if (next != old) {
        r.noalias() -= atoms.col(j) * (next - old);
        alpha(j) = next;
      }
    }
    if (sweep % 8 == 7) r = x - atoms * alpha;
    if (kkt_violation(x, atoms, alpha, lambda) <= opts.kkt_tolerance) return;
  }
  throw SolverFailure("lasso coordinate descent did not converge in " +
                          std::to_string(opts.max_sweeps) + " sweeps",
                      duality_gap(x, atoms, alpha, lambda));
}

}  // namespace

double lasso_objective(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const MatrixXd>& atoms,
                       const Eigen::Ref<const VectorXd>& alpha, double lambda) {
  check_dims(x, atoms);
  if (alpha.size() != atoms.cols()) throw InvalidArgument("code length does not match atom count");
  return 0.5 * (x - atoms * alpha).squaredNorm() + lambda * alpha.lpNorm<1>();
}

double kkt_violation(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const MatrixXd>& atoms,
                     const Eigen::Ref<const VectorXd>& alpha, double lambda) {
  check_dims(x, atoms);
  const VectorXd c = atoms.transpose() * (x - atoms * alpha);
  double worst = 0.0;
  for (Index j = 0; j < c.size(); ++j) {
    const double v = alpha(j) != 0.0 ? std::abs(c(j) - lambda * sign(alpha(j)))
                                     : std::max(0.0, std::abs(c(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

double duality_gap(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const MatrixXd>& atoms,
                   const Eigen::Ref<const VectorXd>& alpha, double lambda) {
  const VectorXd r = x - atoms * alpha;
  const double primal = 0.5 * r.squaredNorm() + lambda * alpha.lpNorm<1>();
  const double corr = atoms.cols() > 0 ? (atoms.transpose() * r).cwiseAbs().maxCoeff() : 0.0;
  const double scale = corr > lambda ? lambda / corr : 1.0;
  const VectorXd theta = scale * r;
  const double dual = theta.dot(x) - 0.5 * theta.squaredNorm();
  return primal - dual;
}

SparseCode lasso_solve(const Eigen::Ref<const VectorXd>& x, const Dictionary& dict,
                       const LassoOptions& opts) {
  return lasso_solve(x, dict.atoms, dict.lambda, opts);
}

SparseCode lasso_solve(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const MatrixXd>& atoms,
                       double lambda, const LassoOptions& opts) {
  check_dims(x, atoms);
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  const Index d = atoms.rows();
  const Index k = atoms.cols();

  SparseCode out;
  out.coefficients = VectorXd::Zero(k);
  if (k == 0) {
    out.objective = 0.5 * x.squaredNorm();
    return out;
  }

  VectorXd& alpha = out.coefficients;
  VectorXd c = atoms.transpose() * x;
  double C = c.cwiseAbs().maxCoeff();
  if (C <= lambda) {
    out.objective = 0.5 * x.squaredNorm();
    return out;
  }

  ActiveSet active(atoms, std::min(d, k));
  std::vector<char> is_active(std::size_t(k), 0);
  std::vector<char> blocked(std::size_t(k), 0);

  const int max_steps = opts.max_steps > 0 ? opts.max_steps : int(10 * (d + k) + 100);
  bool reached = false;
  for (int step = 0; step < max_steps; ++step) {
    if (active.size() == 0) {
      Index first = -1;
      for (Index j = 0; j < k; ++j) {
        if (!blocked[std::size_t(j)] && (first < 0 || std::abs(c(j)) > std::abs(c(first)))) first = j;
      }
      if (first < 0 || std::abs(c(first)) <= lambda) {
        reached = true;
        break;
      }
      C = std::abs(c(first));
      if (active.add(int(first))) {
        is_active[std::size_t(first)] = 1;
      } else {
        blocked[std::size_t(first)] = 1;
        continue;
      }
    }
    out.steps = step + 1;
    const Index a = active.size();
    VectorXd s(a);
    for (Index i = 0; i < a; ++i) s(i) = sign(c(active[i]));

    const VectorXd w = active.solve(s);
    VectorXd u = VectorXd::Zero(d);
    for (Index i = 0; i < a; ++i) u.noalias() += w(i) * atoms.col(active[i]);
    const VectorXd av = atoms.transpose() * u;

    const double tiny = 1e-12 * std::max(1.0, C);
    double gamma = C - lambda;
    enum class Event { Stop, Enter, Drop } event = Event::Stop;
    Index who = -1;

    for (Index j = 0; j < k; ++j) {
      if (is_active[std::size_t(j)] || blocked[std::size_t(j)]) continue;
      for (double side : {1.0, -1.0}) {
        const double den = 1.0 - side * av(j);
        if (den <= 1e-14) continue;
        const double g = (C - side * c(j)) / den;
        if (g > tiny && g < gamma) {
          gamma = g;
          event = Event::Enter;
          who = j;
        }
      }
    }
    for (Index i = 0; i < a; ++i) {
      const int j = active[i];
      if (w(i) == 0.0 || alpha(j) == 0.0) continue;
      const double g = -alpha(j) / w(i);
      if (g > tiny && g < gamma) {
        gamma = g;
        event = Event::Drop;
        who = i;
      }
    }

    for (Index i = 0; i < a; ++i) alpha(active[i]) += gamma * w(i);
    c.noalias() -= gamma * av;
    C -= gamma;

    if (event == Event::Stop) {
      reached = true;
      break;
    }
    if (event == Event::Drop) {
      const int j = active[who];
      alpha(j) = 0.0;
      is_active[std::size_t(j)] = 0;
      active.remove(who);
      std::fill(is_active.begin(), is_active.end(), 0);
      for (int m : active.members()) is_active[std::size_t(m)] = 1;
      std::fill(blocked.begin(), blocked.end(), 0);
    } else if (active.add(int(who))) {
      is_active[std::size_t(who)] = 1;
    } else {
      blocked[std::size_t(who)] = 1;
    }
  }

  // Closed-form refit of the final support, kept when the signs agree.
  if (reached && active.size() > 0) {
    const Index a = active.size();
    const MatrixXd DA = active.gather();
    VectorXd rhs = DA.transpose() * x;
    VectorXd s(a);
    for (Index i = 0; i < a; ++i) {
      s(i) = sign(alpha(active[i]));
      rhs(i) -= lambda * s(i);
    }
    const VectorXd refit = active.solve(rhs);
    bool consistent = true;
    for (Index i = 0; i < a; ++i) consistent = consistent && sign(refit(i)) == s(i);
    if (consistent) {
      for (Index i = 0; i < a; ++i) alpha(active[i]) = refit(i);
    }
  }

  if (kkt_violation(x, atoms, alpha, lambda) > opts.kkt_tolerance) {
    coordinate_descent(x, atoms, lambda, opts, alpha);
    out.polished = true;
  }
  out.objective = lasso_objective(x, atoms, alpha, lambda);
  return out;
}

}  // namespace pref
