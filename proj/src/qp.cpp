#include "ddmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "ddmpc/errors.hpp"
#include "ddmpc/text.hpp"

namespace ddmpc {

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
double inf_norm(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

struct ActiveSetResult {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;
  std::vector<int> working;
  int iterations = 0;
  bool converged = false;
};

/// Greedy selection of linearly independent rows of G, in the given order.
std::vector<int> independent_rows(const Eigen::MatrixXd& g, const std::vector<int>& candidates) {
  std::vector<int> kept;
  Eigen::MatrixXd rows(0, g.cols());
  for (int i : candidates) {
    Eigen::MatrixXd trial(rows.rows() + 1, g.cols());
    trial << rows, g.row(i);
    if (numerical_rank(trial) == trial.rows()) {
      rows = std::move(trial);
      kept.push_back(i);
    }
  }
  return kept;
}

/// Primal active-set iterations for min 1/2 x'Hx + g'x s.t. Gx <= h with H
/// positive definite, starting from a feasible x and an independent working set.
ActiveSetResult primal_active_set(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad0, const Eigen::MatrixXd& g,
                                  const Eigen::VectorXd& h, Eigen::VectorXd x, std::vector<int> working,
                                  double dual_tol, int max_iter) {
  const Eigen::Index r = x.size();
  const Eigen::Index mi = h.size();
  ActiveSetResult res;
  res.lambda = Eigen::VectorXd::Zero(mi);
  std::vector<char> in_working(static_cast<std::size_t>(mi), 0);
  for (int i : working) in_working[static_cast<std::size_t>(i)] = 1;

  bool at_subspace_minimum = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter + 1;
    const Eigen::Index k = static_cast<Eigen::Index>(working.size());
    Eigen::MatrixXd gw_t(r, k);
    for (Eigen::Index j = 0; j < k; ++j) gw_t.col(j) = g.row(working[static_cast<std::size_t>(j)]).transpose();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gw_t);
    const Eigen::MatrixXd q_full = qr.householderQ() * Eigen::MatrixXd::Identity(r, r);
    const Eigen::VectorXd grad = hess * x + grad0;

    Eigen::VectorXd p = Eigen::VectorXd::Zero(r);
    if (!at_subspace_minimum && r - k > 0) {
      const Eigen::MatrixXd zw = q_full.rightCols(r - k);
      Eigen::MatrixXd hz = zw.transpose() * hess * zw;
      hz = 0.5 * (hz + hz.transpose());
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hz);
      Eigen::VectorXd rhs = -(zw.transpose() * grad);
      Eigen::VectorXd pz = ldlt.solve(rhs);
      // one step of iterative refinement
      pz += ldlt.solve(rhs - hz * pz);
      p = zw * pz;
    }

    const double step_floor = 1e-14 * (1.0 + inf_norm(x));
    if (at_subspace_minimum || inf_norm(p) <= step_floor) {
      at_subspace_minimum = false;
      if (k == 0) {
        res.converged = true;
        break;
      }
      const Eigen::MatrixXd rmat = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
      const Eigen::VectorXd lam_w =
          rmat.triangularView<Eigen::Upper>().solve(-(q_full.leftCols(k).transpose() * grad));
      Eigen::Index drop = -1;
      double most_negative = -dual_tol;
      for (Eigen::Index j = 0; j < k; ++j) {
        const bool better = lam_w(j) < most_negative ||
                            (drop >= 0 && lam_w(j) == most_negative &&
                             working[static_cast<std::size_t>(j)] < working[static_cast<std::size_t>(drop)]);
        if (better) {
          most_negative = lam_w(j);
          drop = j;
        }
      }
      if (drop < 0) {
        res.lambda.setZero();
        for (Eigen::Index j = 0; j < k; ++j) {
          res.lambda(working[static_cast<std::size_t>(j)]) = std::max(lam_w(j), 0.0);
        }
        res.converged = true;
        break;
      }
      in_working[static_cast<std::size_t>(working[static_cast<std::size_t>(drop)])] = 0;
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (in_working[static_cast<std::size_t>(i)]) continue;
      const double gp = g.row(i).dot(p);
      if (gp <= 1e-14 * g.row(i).cwiseAbs().maxCoeff() * inf_norm(p)) continue;
      const double slack = std::max(h(i) - g.row(i).dot(x), 0.0);
      const double a = slack / gp;
      if (a < alpha) {
        alpha = a;
        blocking = static_cast<int>(i);
      }
    }
    x += alpha * p;
    if (blocking >= 0) {
      working.push_back(blocking);
      in_working[static_cast<std::size_t>(blocking)] = 1;
    } else {
      at_subspace_minimum = true;
    }
  }
  res.x = std::move(x);
  std::sort(working.begin(), working.end());
  res.working = std::move(working);
  return res;
}

}  // namespace

QuadraticProgram QuadraticProgram::with_variables(int n) {
  QuadraticProgram qp;
  qp.P = Eigen::MatrixXd::Zero(n, n);
  qp.q = Eigen::VectorXd::Zero(n);
  qp.A_eq = Eigen::MatrixXd::Zero(0, n);
  qp.b_eq = Eigen::VectorXd::Zero(0);
  qp.G = Eigen::MatrixXd::Zero(0, n);
  qp.h = Eigen::VectorXd::Zero(0);
  return qp;
}

void QuadraticProgram::validate() const {
  const Eigen::Index n = q.size();
  if (P.rows() != n || P.cols() != n) {
    throw ShapeError("P must be " + std::to_string(n) + " x " + std::to_string(n));
  }
  if (A_eq.cols() != n || A_eq.rows() != b_eq.size()) {
    throw ShapeError("equality block has inconsistent dimensions");
  }
  if (G.cols() != n || G.rows() != h.size()) {
    throw ShapeError("inequality block has inconsistent dimensions");
  }
  const double asym = inf_norm(Eigen::MatrixXd(P - P.transpose()));
  if (asym > 1e-10 * std::max(1.0, inf_norm(P))) {
    throw ShapeError("P is not symmetric (max asymmetry " + text::format_double(asym) + ")");
  }
}

double QuadraticProgram::objective(const Eigen::VectorXd& z) const {
  return 0.5 * z.dot(P * z) + q.dot(z);
}

std::string to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Optimal: return "optimal";
    case QpStatus::Infeasible: return "infeasible";
    case QpStatus::Unbounded: return "unbounded";
    case QpStatus::MaxIterations: return "max-iterations";
  }
  return "unknown";
}

double KktResiduals::max() const {
  return std::max({stationarity, primal, dual, complementarity});
}

KktResiduals kkt_residuals(const QuadraticProgram& qp, const Eigen::VectorXd& z, const Eigen::VectorXd& duals_eq,
                           const Eigen::VectorXd& duals_ineq) {
  KktResiduals r;
  Eigen::VectorXd station = qp.P * z + qp.q;
  if (qp.num_equalities() > 0) station += qp.A_eq.transpose() * duals_eq;
  if (qp.num_inequalities() > 0) station += qp.G.transpose() * duals_ineq;
  r.stationarity = inf_norm(station);
  double primal = 0.0;
  if (qp.num_equalities() > 0) primal = inf_norm(Eigen::VectorXd(qp.A_eq * z - qp.b_eq));
  if (qp.num_inequalities() > 0) {
    const Eigen::VectorXd slack = qp.G * z - qp.h;
    primal = std::max(primal, std::max(slack.maxCoeff(), 0.0));
    r.dual = std::max(-duals_ineq.minCoeff(), 0.0);
    r.complementarity = inf_norm(Eigen::VectorXd(duals_ineq.cwiseProduct(slack)));
  }
  r.primal = primal;
  return r;
}

namespace {

/// Iterative refinement of the equality-constrained KKT system defined by the
/// equalities and the working set, with residuals accumulated in long double.
/// Keeps the refined point only when it lowers the largest KKT residual.
void polish(const QuadraticProgram& qp, const std::vector<int>& working, Eigen::VectorXd& z, Eigen::VectorXd& nu,
            Eigen::VectorXd& lambda) {
  const Eigen::Index n = z.size();
  const Eigen::Index me = nu.size();
  const Eigen::Index k = static_cast<Eigen::Index>(working.size());
  const Eigen::Index dim = n + me + k;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs(dim);
  kkt.topLeftCorner(n, n) = qp.P;
  rhs.head(n) = -qp.q;
  if (me > 0) {
    kkt.block(0, n, n, me) = qp.A_eq.transpose();
    kkt.block(n, 0, me, n) = qp.A_eq;
    rhs.segment(n, me) = qp.b_eq;
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const int row = working[static_cast<std::size_t>(j)];
    kkt.block(0, n + me + j, n, 1) = qp.G.row(row).transpose();
    kkt.block(n + me + j, 0, 1, n) = qp.G.row(row);
    rhs(n + me + j) = qp.h(row);
  }
  Eigen::VectorXd x(dim);
  x.head(n) = z;
  x.segment(n, me) = nu;
  for (Eigen::Index j = 0; j < k; ++j) x(n + me + j) = lambda(working[static_cast<std::size_t>(j)]);

  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
  const double before = kkt_residuals(qp, z, nu, lambda).max();
  double best = before;
  Eigen::VectorXd best_x = x;
  for (int sweep = 0; sweep < 3; ++sweep) {
    Eigen::VectorXd res(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      long double acc = rhs(i);
      for (Eigen::Index j = 0; j < dim; ++j) acc -= static_cast<long double>(kkt(i, j)) * x(j);
      res(i) = static_cast<double>(acc);
    }
    x += cod.solve(res);
    Eigen::VectorXd lam = lambda;
    for (Eigen::Index j = 0; j < k; ++j) lam(working[static_cast<std::size_t>(j)]) = x(n + me + j);
    const double now = kkt_residuals(qp, x.head(n), x.segment(n, me), lam).max();
    if (now < best) {
      best = now;
      best_x = x;
    }
  }
  if (best < before) {
    z = best_x.head(n);
    nu = best_x.segment(n, me);
    for (Eigen::Index j = 0; j < k; ++j) lambda(working[static_cast<std::size_t>(j)]) = best_x(n + me + j);
  }
}

}  // namespace

QpSolution solve(const QuadraticProgram& qp, const QpSettings& settings) {
  qp.validate();
  const int n = qp.num_variables();
  const int me = qp.num_equalities();
  const int mi = qp.num_inequalities();

  QpSolution sol;
  sol.z = Eigen::VectorXd::Zero(n);
  sol.duals_eq = Eigen::VectorXd::Zero(me);
  sol.duals_ineq = Eigen::VectorXd::Zero(mi);

  // Equality elimination: z = z0 + Z phi.
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd basis;
  Eigen::MatrixXd eq_pinv;
  if (me > 0) {
    const auto ns = null_space_parametrization(qp.A_eq);
    z0 = ns.pinv * qp.b_eq;
    basis = ns.null_basis;
    eq_pinv = ns.pinv;
    const double eq_res = inf_norm(Eigen::VectorXd(qp.A_eq * z0 - qp.b_eq));
    if (eq_res > settings.tol * (1.0 + inf_norm(qp.b_eq))) {
      sol.status = QpStatus::Infeasible;
      sol.z = z0;
      sol.message = "inconsistent equality constraints (residual " + text::format_double(eq_res) + ")";
      return sol;
    }
  } else {
    basis = Eigen::MatrixXd::Identity(n, n);
  }
  const Eigen::Index r = basis.cols();

  Eigen::MatrixXd hess = basis.transpose() * qp.P * basis;
  hess = 0.5 * (hess + hess.transpose());
  const Eigen::VectorXd grad0 = basis.transpose() * (qp.P * z0 + qp.q);
  const Eigen::MatrixXd g_red = qp.G * basis;
  const Eigen::VectorXd h_red = qp.h - qp.G * z0;

  if (r > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess, Eigen::EigenvaluesOnly);
    sol.min_reduced_eigenvalue = eig.eigenvalues()(0);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (sol.min_reduced_eigenvalue <= 1e-13 * scale) {
      sol.status = QpStatus::Unbounded;
      sol.z = z0;
      sol.message = "objective is not strictly convex on the equality null space (min eigenvalue " +
                    text::format_double(sol.min_reduced_eigenvalue) + ")";
      return sol;
    }
  } else {
    sol.min_reduced_eigenvalue = std::numeric_limits<double>::infinity();
  }

  const double feas_tol = settings.tol * (1.0 + inf_norm(h_red));
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(r);
  std::vector<int> start_working;

  if (mi > 0 && h_red.minCoeff() < -feas_tol) {
    if (r == 0) {
      sol.status = QpStatus::Infeasible;
      sol.z = z0;
      sol.message = "equality constraints fix a point that violates the inequalities";
      return sol;
    }
    // Elastic phase 1: min 1/2|phi|^2 + 1/2 s^2 + M s  s.t.  G phi - s <= h, s >= 0.
    Eigen::MatrixXd g1 = Eigen::MatrixXd::Zero(mi + 1, r + 1);
    g1.topLeftCorner(mi, r) = g_red;
    g1.col(r).head(mi).setConstant(-1.0);
    g1(mi, r) = -1.0;
    Eigen::VectorXd h1(mi + 1);
    h1 << h_red, 0.0;
    const Eigen::MatrixXd hess1 = Eigen::MatrixXd::Identity(r + 1, r + 1);
    double big_m = 1e3 * (1.0 + inf_norm(h_red) + inf_norm(g_red));
    bool found = false;
    double s_final = 0.0;
    for (int attempt = 0; attempt < 5 && !found; ++attempt, big_m *= 1e3) {
      Eigen::VectorXd grad1 = Eigen::VectorXd::Zero(r + 1);
      grad1(r) = big_m;
      Eigen::VectorXd x1 = Eigen::VectorXd::Zero(r + 1);
      x1(r) = std::max(0.0, -h_red.minCoeff());
      const auto p1 = primal_active_set(hess1, grad1, g1, h1, x1, {}, settings.tol, settings.max_iter);
      sol.iterations += p1.iterations;
      s_final = p1.x(r);
      if (!p1.converged) break;
      if (s_final <= feas_tol) {
        phi = p1.x.head(r);
        found = true;
      }
    }
    if (!found) {
      sol.status = QpStatus::Infeasible;
      sol.z = z0 + basis * phi;
      sol.message = "inequality constraints are infeasible (phase-1 slack " + text::format_double(s_final) + ")";
      return sol;
    }
  }

  if (mi > 0 && r > 0) {
    const Eigen::VectorXd slack = h_red - g_red * phi;
    std::vector<int> active;
    for (int i = 0; i < mi; ++i) {
      if (std::abs(slack(i)) <= settings.activity_tol) active.push_back(i);
    }
    start_working = independent_rows(g_red, active);
  }

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(mi);
  if (r > 0) {
    const auto res = primal_active_set(hess, grad0, g_red, h_red, phi, start_working, settings.tol,
                                       std::max(settings.max_iter - sol.iterations, 1));
    sol.iterations += res.iterations;
    phi = res.x;
    lambda = res.lambda;
    sol.active_set = res.working;
    sol.status = res.converged ? QpStatus::Optimal : QpStatus::MaxIterations;
    if (!res.converged) sol.message = "iteration limit reached; returning best iterate";
  } else {
    sol.status = QpStatus::Optimal;
  }

  sol.z = z0 + basis * phi;
  sol.duals_ineq = lambda;
  if (me > 0) {
    Eigen::VectorXd rhs = qp.P * sol.z + qp.q;
    if (mi > 0) rhs += qp.G.transpose() * lambda;
    sol.duals_eq = -eq_pinv.transpose() * rhs;
  }
  if (sol.optimal()) polish(qp, sol.active_set, sol.z, sol.duals_eq, sol.duals_ineq);
  sol.objective = qp.objective(sol.z);
  sol.kkt = kkt_residuals(qp, sol.z, sol.duals_eq, sol.duals_ineq);
  return sol;
}

LicqReport check_licq(const QuadraticProgram& qp, const Eigen::VectorXd& z, double activity_tol, double rel_tol) {
  qp.validate();
  if (z.size() != qp.num_variables()) {
    throw ShapeError("point has dimension " + std::to_string(z.size()) + ", expected " +
                     std::to_string(qp.num_variables()));
  }
  if (qp.num_equalities() > 0) {
    const double res = inf_norm(Eigen::VectorXd(qp.A_eq * z - qp.b_eq));
    if (res > activity_tol) {
      throw PreconditionError("point violates equality constraints by " + text::format_double(res));
    }
  }
  LicqReport report;
  Eigen::VectorXd slack = Eigen::VectorXd::Zero(qp.num_inequalities());
  if (qp.num_inequalities() > 0) {
    slack = qp.G * z - qp.h;
    if (slack.maxCoeff() > activity_tol) {
      throw PreconditionError("point violates inequality constraints by " + text::format_double(slack.maxCoeff()));
    }
  }
  for (int i = 0; i < qp.num_inequalities(); ++i) {
    if (std::abs(slack(i)) <= activity_tol) report.active_rows.push_back(i);
  }
  report.rows = qp.num_equalities() + static_cast<int>(report.active_rows.size());
  Eigen::MatrixXd rows(report.rows, qp.num_variables());
  rows.topRows(qp.num_equalities()) = qp.A_eq;
  for (std::size_t j = 0; j < report.active_rows.size(); ++j) {
    rows.row(qp.num_equalities() + static_cast<Eigen::Index>(j)) = qp.G.row(report.active_rows[j]);
  }
  report.rank = numerical_rank(rows, rel_tol);
  report.holds = report.rank == report.rows;
  return report;
}

namespace {

void write_block(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << (j ? " " : "") << text::format_double(m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_block(std::istream& in, const std::string& expected) {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  if (!(in >> name >> rows >> cols) || name != expected) {
    throw IoError("QP dump: expected block '" + expected + "'");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string tok;
      if (!(in >> tok)) throw IoError("QP dump: truncated block '" + expected + "'");
      m(i, j) = text::parse_double(tok, "QP dump block " + expected);
    }
  }
  return m;
}

}  // namespace

void write_qp_debug(std::ostream& out, const QuadraticProgram& qp) {
  out << "ddmpc-qp " << qp.num_variables() << ' ' << qp.num_equalities() << ' ' << qp.num_inequalities() << '\n';
  write_block(out, "P", qp.P);
  write_block(out, "q", qp.q);
  write_block(out, "A_eq", qp.A_eq);
  write_block(out, "b_eq", qp.b_eq);
  write_block(out, "G", qp.G);
  write_block(out, "h", qp.h);
}

QuadraticProgram read_qp_debug(std::istream& in) {
  std::string magic;
  int n = 0;
  int me = 0;
  int mi = 0;
  if (!(in >> magic >> n >> me >> mi) || magic != "ddmpc-qp") {
    throw IoError("QP dump: missing 'ddmpc-qp' header");
  }
  QuadraticProgram qp;
  qp.P = read_block(in, "P");
  qp.q = read_block(in, "q");
  qp.A_eq = read_block(in, "A_eq");
  qp.b_eq = read_block(in, "b_eq");
  qp.G = read_block(in, "G");
  qp.h = read_block(in, "h");
  if (qp.num_variables() != n || qp.num_equalities() != me || qp.num_inequalities() != mi) {
    throw IoError("QP dump: header dimensions do not match blocks");
  }
  qp.validate();
  return qp;
}

}  // namespace ddmpc
