#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ddmpc/qp.hpp"
#include "ddmpc/signals.hpp"

namespace ddmpc {

/// Polytope {v : G v <= h}. Zero rows means the whole space.
struct Polytope {
  Eigen::MatrixXd G;
  Eigen::VectorXd h;

  static Polytope whole_space(int dim);
  static Polytope box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

  int dim() const { return static_cast<int>(G.cols()); }
  bool unconstrained() const { return G.rows() == 0; }
  bool contains(const Eigen::VectorXd& v, double tol = 1e-9) const;
  /// 0 lies strictly inside.
  bool contains_origin_in_interior() const;
  /// No nonzero recession direction: G full column rank and G'y = 0 for some y > 0.
  bool is_bounded() const;
};

struct NominalMpcConfig {
  int L = 0;
  int n = 0;
  Eigen::MatrixXd Q;  ///< p x p, positive definite
  Eigen::MatrixXd R;  ///< m x m, positive definite
  Polytope input_set;
  Polytope output_set;  ///< zero rows: unconstrained outputs
  TrajectoryData data;
  /// Promote the excitation warning to a DataQualityError.
  bool strict_excitation = false;
  double rank_tol = kDefaultRankTol;
  QpSettings qp;

  /// Throws ConfigError on invalid settings. Returns warnings that do not
  /// prevent a solve (insufficient excitation when not strict).
  std::vector<std::string> validate() const;
};

/// Position of the predicted signals inside the stacked trajectory vector
/// w = [u_{-n}; ...; u_{L-1}; y_{-n}; ...; y_{L-1}].
struct TrajectoryLayout {
  int m = 0;
  int p = 0;
  int n = 0;
  int L = 0;

  int steps() const { return L + n; }
  int size() const { return (m + p) * steps(); }
  /// First row of u_k (k in [-n, L-1]).
  int u_row(int k) const { return m * (k + n); }
  int y_row(int k) const { return m * steps() + p * (k + n); }
};

/// Describes the variables of the assembled nominal program.
struct NominalLayout {
  TrajectoryLayout trajectory;
  int alpha_dim = 0;         ///< N - (L + n) + 1 columns of the Hankel matrix
  int trajectory_dim = 0;    ///< (m + p)(L + n)
  int reduced_dim = 0;       ///< rank of the stacked Hankel matrix: decision variables after elimination
  int past_rows = 0;         ///< equality rows fixing the initial window
  int terminal_rows = 0;     ///< equality rows forcing the last n steps to zero
  int input_rows = 0;
  int output_rows = 0;
};

struct MpcSolution {
  QpStatus status = QpStatus::Infeasible;
  Sequence u_bar;         ///< k = -n .. L-1
  Sequence y_bar;         ///< k = -n .. L-1
  Eigen::VectorXd alpha;  ///< minimum-norm combination vector
  double cost = 0.0;
  QpSolution qp;

  bool optimal() const { return status == QpStatus::Optimal; }
  /// Predicted input at step k >= 0.
  const Eigen::VectorXd& input(int k, int n) const { return u_bar.at(static_cast<std::size_t>(k + n)); }
};

struct AssembledNominal {
  QuadraticProgram qp;
  NominalLayout layout;
};

/// Nominal data-driven MPC with terminal equality constraints. The Hankel
/// decomposition and all constant QP blocks are computed once; each solve only
/// updates the initial-window right-hand side.
class NominalMpc {
 public:
  explicit NominalMpc(NominalMpcConfig config);

  const NominalMpcConfig& config() const { return config_; }
  const NominalLayout& layout() const { return layout_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  /// Stacked Hankel matrix [H_{L+n}(u); H_{L+n}(y)].
  const Eigen::MatrixXd& hankel() const { return hankel_; }
  /// Orthonormal basis of its column space: w = basis * theta.
  const Eigen::MatrixXd& trajectory_basis() const { return basis_; }

  AssembledNominal assemble(const ExtendedState& init) const;
  MpcSolution solve(const ExtendedState& init) const;
  /// Sum over k in [0, L-1] of |u_k|_R^2 + |y_k|_Q^2.
  double tracking_cost(const Eigen::VectorXd& trajectory) const;

 private:
  void check_init(const ExtendedState& init) const;

  NominalMpcConfig config_;
  NominalLayout layout_;
  std::vector<std::string> warnings_;
  Eigen::MatrixXd hankel_;
  Eigen::MatrixXd hankel_pinv_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd weight_;  ///< stage-cost weight on w
  QuadraticProgram template_;
};

AssembledNominal assemble_nominal(const NominalMpcConfig& config, const ExtendedState& init);
MpcSolution solve_nominal(const NominalMpcConfig& config, const ExtendedState& init);

/// Block-diagonal stage-cost weight on a trajectory vector: R on inputs and Q on
/// outputs for k in [0, L-1], zero on the initial window.
Eigen::MatrixXd trajectory_weight(const TrajectoryLayout& layout, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R);

/// Splits a stacked trajectory vector into input and output sequences.
void split_trajectory(const TrajectoryLayout& layout, const Eigen::VectorXd& w, Sequence& u, Sequence& y);

}  // namespace ddmpc
