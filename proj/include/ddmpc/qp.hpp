#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "ddmpc/linalg.hpp"

namespace ddmpc {

/// min 1/2 z'Pz + q'z  s.t.  A_eq z = b_eq,  G z <= h.
struct QuadraticProgram {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;

  /// Unconstrained problem with `n` variables; constraint blocks get 0 rows.
  static QuadraticProgram with_variables(int n);

  int num_variables() const { return static_cast<int>(q.size()); }
  int num_equalities() const { return static_cast<int>(b_eq.size()); }
  int num_inequalities() const { return static_cast<int>(h.size()); }

  /// Throws ShapeError on inconsistent blocks or a non-symmetric P.
  void validate() const;
  double objective(const Eigen::VectorXd& z) const;
};

enum class QpStatus { Optimal, Infeasible, Unbounded, MaxIterations };

std::string to_string(QpStatus s);

/// Infinity norms of the KKT conditions for the Lagrangian
/// 1/2 z'Pz + q'z + nu'(A z - b) + lambda'(G z - h).
struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;            ///< max(-lambda_i, 0)
  double complementarity = 0.0; ///< max |lambda_i (G_i z - h_i)|
  double max() const;
};

KktResiduals kkt_residuals(const QuadraticProgram& qp, const Eigen::VectorXd& z, const Eigen::VectorXd& duals_eq,
                           const Eigen::VectorXd& duals_ineq);

struct QpSettings {
  double tol = 1e-9;
  double activity_tol = 1e-8;
  int max_iter = 1000;
};

struct QpSolution {
  QpStatus status = QpStatus::Infeasible;
  Eigen::VectorXd z;
  Eigen::VectorXd duals_eq;
  Eigen::VectorXd duals_ineq;
  std::vector<int> active_set;  ///< indices into the rows of G, increasing
  KktResiduals kkt;
  double objective = 0.0;
  int iterations = 0;
  /// Smallest eigenvalue of the Hessian restricted to the equality null space.
  double min_reduced_eigenvalue = 0.0;
  std::string message;

  bool optimal() const { return status == QpStatus::Optimal; }
};

/// Primal active-set method on the equality-eliminated (null-space) problem.
/// Requires P to be positive definite on the null space of A_eq; otherwise the
/// status is Unbounded. A feasible start is found with an elastic phase-1 QP.
QpSolution solve(const QuadraticProgram& qp, const QpSettings& settings = {});

struct LicqReport {
  bool holds = false;
  int rank = 0;
  int rows = 0;                  ///< equality rows + active inequality rows
  std::vector<int> active_rows;  ///< active inequality indices
};

/// Linear independence of the equality rows and the inequality rows active at z.
/// Throws PreconditionError when z violates a constraint by more than activity_tol.
LicqReport check_licq(const QuadraticProgram& qp, const Eigen::VectorXd& z, double activity_tol = 1e-8,
                      double rel_tol = kDefaultRankTol);

/// Plain-text dump: a dimensions header followed by row-major blocks.
void write_qp_debug(std::ostream& out, const QuadraticProgram& qp);
QuadraticProgram read_qp_debug(std::istream& in);

}  // namespace ddmpc
