#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ddmpc/mpc_nominal.hpp"

namespace ddmpc {

struct RobustMpcConfig {
  NominalMpcConfig base;  ///< data holds the noisy outputs; output set must be unconstrained
  double lambda_alpha = 1.0;
  double lambda_sigma = 1.0;
  double beta_alpha = 0.5;
  double beta_sigma = 0.5;
  double eps_bar = 0.0;  ///< noise bound; must be strictly positive

  std::vector<std::string> validate() const;
  double alpha_weight() const;  ///< lambda_alpha * eps_bar^beta_alpha
  double sigma_weight() const;  ///< lambda_sigma / eps_bar^beta_sigma
};

/// Decision vector z = [alpha_hat; y_hat].
struct RobustLayout {
  TrajectoryLayout trajectory;
  int alpha_dim = 0;
  int y_dim = 0;  ///< p (L + n)
  int past_rows = 0;
  int terminal_rows = 0;
  int input_rows = 0;

  int num_variables() const { return alpha_dim + y_dim; }
};

struct RobustCost {
  double tracking = 0.0;
  double alpha_penalty = 0.0;
  double sigma_penalty = 0.0;
  double total() const { return tracking + alpha_penalty + sigma_penalty; }
};

/// Post-solve check of |alpha|^2 <= J / (lambda_a eps^b_a) and
/// |sigma|^2 <= eps^b_s J / lambda_s.
struct RobustBoundsAudit {
  double alpha_sq = 0.0;
  double alpha_bound = 0.0;
  double sigma_sq = 0.0;
  double sigma_bound = 0.0;
  double alpha_excess() const { return alpha_sq - alpha_bound; }
  double sigma_excess() const { return sigma_sq - sigma_bound; }
  bool holds(double tol = 1e-9) const { return alpha_excess() <= tol && sigma_excess() <= tol; }
};

struct RobustMpcSolution {
  QpStatus status = QpStatus::Infeasible;
  Sequence u_hat;      ///< k = -n .. L-1
  Sequence y_hat;
  Sequence sigma_hat;
  Eigen::VectorXd alpha_hat;
  double cost = 0.0;
  RobustCost breakdown;
  RobustBoundsAudit audit;
  QpSolution qp;

  bool optimal() const { return status == QpStatus::Optimal; }
  const Eigen::VectorXd& input(int k, int n) const { return u_hat.at(static_cast<std::size_t>(k + n)); }
};

struct AssembledRobust {
  QuadraticProgram qp;
  RobustLayout layout;
};

/// Data-driven MPC for noisy output data: slack on the Hankel consistency
/// constraint and a noise-scaled penalty on the combination vector.
class RobustMpc {
 public:
  explicit RobustMpc(RobustMpcConfig config);

  const RobustMpcConfig& config() const { return config_; }
  const RobustLayout& layout() const { return layout_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const Eigen::MatrixXd& input_hankel() const { return hu_; }
  const Eigen::MatrixXd& output_hankel() const { return hy_; }

  /// `init` is built from measured (noisy) outputs.
  AssembledRobust assemble(const ExtendedState& init) const;
  RobustMpcSolution solve(const ExtendedState& init) const;

  /// Direct evaluation of the cost terms, with sigma = H_y alpha - y_hat.
  RobustCost evaluate(const Eigen::VectorXd& alpha_hat, const Eigen::VectorXd& y_hat) const;
  Eigen::VectorXd pack(const Eigen::VectorXd& alpha_hat, const Eigen::VectorXd& y_hat) const;

 private:
  RobustMpcConfig config_;
  RobustLayout layout_;
  std::vector<std::string> warnings_;
  Eigen::MatrixXd hu_;
  Eigen::MatrixXd hy_;
  QuadraticProgram template_;
};

AssembledRobust assemble_robust(const RobustMpcConfig& config, const ExtendedState& init);
RobustMpcSolution solve_robust(const RobustMpcConfig& config, const ExtendedState& init);

}  // namespace ddmpc
