// Independent reference computations used only by the test suites. Nothing in
// here calls into the library routines it is used to check.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracles {

/// Rank from a full SVD with relative threshold.
inline int svd_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-9) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

struct EnumerationResult {
  Eigen::VectorXd z;
  double objective = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

/// Brute-force QP solution: solve the equality-constrained problem for every
/// subset of inequalities treated as equalities and keep the best feasible one.
inline EnumerationResult enumerate_active_sets(const Eigen::MatrixXd& p, const Eigen::VectorXd& q,
                                               const Eigen::MatrixXd& a_eq, const Eigen::VectorXd& b_eq,
                                               const Eigen::MatrixXd& g, const Eigen::VectorXd& h,
                                               double feas_tol = 1e-9) {
  const Eigen::Index n = q.size();
  const Eigen::Index mi = h.size();
  EnumerationResult best;
  for (unsigned mask = 0; mask < (1u << mi); ++mask) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (mask & (1u << i)) rows.push_back(i);
    }
    const Eigen::Index k = a_eq.rows() + static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd c(k, n);
    Eigen::VectorXd d(k);
    c.topRows(a_eq.rows()) = a_eq;
    d.head(a_eq.rows()) = b_eq;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      c.row(a_eq.rows() + static_cast<Eigen::Index>(j)) = g.row(rows[j]);
      d(a_eq.rows() + static_cast<Eigen::Index>(j)) = h(rows[j]);
    }
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = p;
    kkt.topRightCorner(n, k) = c.transpose();
    kkt.bottomLeftCorner(k, n) = c;
    Eigen::VectorXd rhs(n + k);
    rhs << -q, d;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd z = sol.head(n);
    if (k > 0 && (c * z - d).cwiseAbs().maxCoeff() > 1e-7) continue;
    if (mi > 0 && (g * z - h).maxCoeff() > feas_tol) continue;
    const double obj = 0.5 * z.dot(p * z) + q.dot(z);
    if (obj < best.objective) {
      best.objective = obj;
      best.z = z;
      best.feasible = true;
    }
  }
  return best;
}

/// Random strictly convex QP with a known feasible point.
struct RandomQp {
  Eigen::MatrixXd p;
  Eigen::VectorXd q;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd g;
  Eigen::VectorXd h;
};

inline RandomQp random_qp(std::mt19937_64& rng, int n, int me, int mi) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  auto randn = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = nd(rng);
    return m;
  };
  RandomQp qp;
  const Eigen::MatrixXd m = randn(n, n);
  qp.p = m * m.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
  qp.q = 3.0 * randn(n, 1);
  qp.a_eq = randn(me, n);
  const Eigen::VectorXd z_feas = randn(n, 1);
  qp.b_eq = qp.a_eq * z_feas;
  qp.g = randn(mi, n);
  qp.h = qp.g * z_feas;
  for (Eigen::Index i = 0; i < qp.h.size(); ++i) qp.h(i) += ud(rng);
  return qp;
}

/// Controllable and observable random state-space matrices, spectral radius < 1.
struct RandomSystem {
  Eigen::MatrixXd a, b, c, d;
};

inline RandomSystem random_system(std::mt19937_64& rng, int n, int m, int p, double radius = 0.9) {
  std::normal_distribution<double> nd;
  auto randn = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd mat(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) mat(i, j) = nd(rng);
    return mat;
  };
  for (;;) {
    RandomSystem s{randn(n, n), randn(n, m), randn(p, n), randn(p, m)};
    Eigen::EigenSolver<Eigen::MatrixXd> es(s.a);
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    s.a *= radius / rho;
    Eigen::MatrixXd ctrb(n, n * m);
    Eigen::MatrixXd obsv(n * p, n);
    Eigen::MatrixXd ab = s.b;
    Eigen::MatrixXd ca = s.c;
    for (int k = 0; k < n; ++k) {
      ctrb.middleCols(k * m, m) = ab;
      obsv.middleRows(k * p, p) = ca;
      ab = s.a * ab;
      ca = ca * s.a;
    }
    if (svd_rank(ctrb, 1e-6) == n && svd_rank(obsv, 1e-6) == n) return s;
  }
}

/// Plain loop simulation of x+ = Ax + Bu, y = Cx + Du.
inline std::vector<Eigen::VectorXd> simulate_outputs(const RandomSystem& s, Eigen::VectorXd x,
                                                     const std::vector<Eigen::VectorXd>& u) {
  std::vector<Eigen::VectorXd> y;
  for (const auto& uk : u) {
    y.emplace_back(s.c * x + s.d * uk);
    x = s.a * x + s.b * uk;
  }
  return y;
}

}  // namespace oracles
