#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

double lasso_objective(const Eigen::VectorXd& x, const Eigen::MatrixXd& D,
                       const Eigen::VectorXd& alpha, double lambda) {
  double sq = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    double r = x(i);
    for (int j = 0; j < D.cols(); ++j) r -= D(i, j) * alpha(j);
    sq += r * r;
  }
  double l1 = 0.0;
  for (int j = 0; j < alpha.size(); ++j) l1 += std::abs(alpha(j));
  return 0.5 * sq + lambda * l1;
}

LassoSolution lasso_by_enumeration(const Eigen::VectorXd& x, const Eigen::MatrixXd& D,
                                   double lambda) {
  const int k = int(D.cols());
  LassoSolution best{Eigen::VectorXd::Zero(k), 0.5 * x.squaredNorm()};
  long patterns = 1;
  for (int j = 0; j < k; ++j) patterns *= 3;

  for (long code = 1; code < patterns; ++code) {
    std::vector<int> support;
    std::vector<double> signs;
    long c = code;
    for (int j = 0; j < k; ++j, c /= 3) {
      const int digit = int(c % 3);
      if (digit == 0) continue;
      support.push_back(j);
      signs.push_back(digit == 1 ? 1.0 : -1.0);
    }
    const int s = int(support.size());
    if (s > D.rows()) continue;
    Eigen::MatrixXd G(s, s);
    Eigen::VectorXd rhs(s);
    for (int a = 0; a < s; ++a) {
      rhs(a) = D.col(support[a]).dot(x) - lambda * signs[a];
      for (int b = 0; b < s; ++b) G(a, b) = D.col(support[a]).dot(D.col(support[b]));
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd z = lu.solve(rhs);
    bool ok = true;
    for (int a = 0; a < s; ++a) ok = ok && z(a) * signs[a] > 0.0;
    if (!ok) continue;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(k);
    for (int a = 0; a < s; ++a) alpha(support[a]) = z(a);
    const double obj = lasso_objective(x, D, alpha, lambda);
    if (obj < best.objective) best = {alpha, obj};
  }
  return best;
}

double kkt_violation(const Eigen::VectorXd& x, const Eigen::MatrixXd& D,
                     const Eigen::VectorXd& alpha, double lambda) {
  std::vector<double> r(std::size_t(x.size()));
  for (int i = 0; i < x.size(); ++i) {
    r[i] = x(i);
    for (int j = 0; j < D.cols(); ++j) r[i] -= D(i, j) * alpha(j);
  }
  double worst = 0.0;
  for (int j = 0; j < D.cols(); ++j) {
    double c = 0.0;
    for (int i = 0; i < x.size(); ++i) c += D(i, j) * r[i];
    double v;
    if (alpha(j) > 0) {
      v = std::abs(c - lambda);
    } else if (alpha(j) < 0) {
      v = std::abs(c + lambda);
    } else {
      v = std::abs(c) - lambda;
    }
    worst = std::max(worst, v);
  }
  return worst;
}

double residual(const std::vector<double>& x, const std::vector<double>& a,
                pref::ResidualMetric metric, double eps) {
  double s = 0.0;
  switch (metric) {
    case pref::ResidualMetric::L1:
      for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - a[i]);
      return s;
    case pref::ResidualMetric::Euclidean:
      for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - a[i]) * (x[i] - a[i]);
      return std::sqrt(s);
    case pref::ResidualMetric::Cosine: {
      double xa = 0.0, xx = 0.0, aa = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        xa += x[i] * a[i];
        xx += x[i] * x[i];
        aa += a[i] * a[i];
      }
      if (xx == 0.0 || aa == 0.0) return 1.0;
      return 1.0 - xa / std::sqrt(xx * aa);
    }
    case pref::ResidualMetric::ChiSquare:
      for (std::size_t i = 0; i < x.size(); ++i) {
        s += (x[i] - a[i]) * (x[i] - a[i]) / (std::abs(x[i] + a[i]) + eps);
      }
      return s / 2.0;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> m) {
  const std::size_t n = m.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += m[p][q] * m[p][q];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(m[p][q]) < 1e-300) continue;
        const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m[k][p], mkq = m[k][q];
          m[k][p] = c * mkp - s * mkq;
          m[k][q] = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m[p][k], mqk = m[q][k];
          m[p][k] = c * mpk - s * mqk;
          m[q][k] = s * mpk + c * mqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = m[i][i];
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

std::vector<std::vector<double>> covariance(const Eigen::MatrixXd& samples) {
  const auto k = std::size_t(samples.rows());
  const auto n = std::size_t(samples.cols());
  std::vector<double> mean(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t s = 0; s < n; ++s) mean[i] += samples(int(i), int(s));
    mean[i] /= double(n);
  }
  std::vector<std::vector<double>> cov(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double acc = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        acc += (samples(int(i), int(s)) - mean[i]) * (samples(int(j), int(s)) - mean[j]);
      }
      cov[i][j] = acc / double(n - 1);
    }
  }
  return cov;
}

}  // namespace oracle
