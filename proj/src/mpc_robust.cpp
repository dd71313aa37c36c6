#include "ddmpc/mpc_robust.hpp"

#include <cmath>

#include "ddmpc/errors.hpp"

namespace ddmpc {

std::vector<std::string> RobustMpcConfig::validate() const {
  if (!(eps_bar > 0.0)) {
    throw ConfigError("eps_bar must be strictly positive for the robust controller; use the nominal controller "
                      "for noise-free data");
  }
  if (!(lambda_alpha > 0.0) || !(lambda_sigma > 0.0)) throw ConfigError("lambda_alpha and lambda_sigma must be positive");
  if (!(beta_alpha > 0.0) || !(beta_sigma > 0.0)) throw ConfigError("beta_alpha and beta_sigma must be positive");
  if (!(beta_alpha + beta_sigma < 2.0)) throw ConfigError("beta_alpha + beta_sigma must be below 2");
  auto warnings = base.validate();
  if (base.L < 2 * base.n) throw ConfigError("robust controller needs L >= 2n");
  if (!base.output_set.unconstrained()) throw ConfigError("robust controller does not support output constraints");
  if (!base.input_set.is_bounded()) throw ConfigError("input set must be a bounded polytope");
  if (!base.input_set.contains_origin_in_interior()) throw ConfigError("input set must contain 0 in its interior");
  return warnings;
}

double RobustMpcConfig::alpha_weight() const { return lambda_alpha * std::pow(eps_bar, beta_alpha); }

double RobustMpcConfig::sigma_weight() const { return lambda_sigma / std::pow(eps_bar, beta_sigma); }

RobustMpc::RobustMpc(RobustMpcConfig config) : config_(std::move(config)) {
  warnings_ = config_.validate();
  const auto& base = config_.base;
  const int m = base.data.m();
  const int p = base.data.p();
  const int L = base.L;
  const int n = base.n;
  const int depth = L + n;
  auto& tl = layout_.trajectory;
  tl = TrajectoryLayout{m, p, n, L};

  hu_ = build_hankel(base.data.inputs(), depth).entries;
  hy_ = build_hankel(base.data.outputs(), depth).entries;
  const int k_cols = static_cast<int>(hu_.cols());
  const int ny = p * depth;
  layout_.alpha_dim = k_cols;
  layout_.y_dim = ny;

  Eigen::MatrixXd wu = Eigen::MatrixXd::Zero(m * depth, m * depth);
  Eigen::MatrixXd wy = Eigen::MatrixXd::Zero(ny, ny);
  for (int k = n; k < depth; ++k) {
    wu.block(k * m, k * m, m, m) = base.R;
    wy.block(k * p, k * p, p, p) = base.Q;
  }
  const double a = config_.alpha_weight();
  const double c = config_.sigma_weight();
  Eigen::MatrixXd half(k_cols + ny, k_cols + ny);
  half.topLeftCorner(k_cols, k_cols) = hu_.transpose() * wu * hu_ +
                                       a * Eigen::MatrixXd::Identity(k_cols, k_cols) + c * hy_.transpose() * hy_;
  half.topRightCorner(k_cols, ny) = -c * hy_.transpose();
  half.bottomLeftCorner(ny, k_cols) = -c * hy_;
  half.bottomRightCorner(ny, ny) = wy + c * Eigen::MatrixXd::Identity(ny, ny);

  auto& qp = template_;
  qp = QuadraticProgram::with_variables(k_cols + ny);
  qp.P = half + half.transpose();

  const int past_u = m * n;
  const int past_y = p * n;
  layout_.past_rows = past_u + past_y;
  layout_.terminal_rows = past_u + past_y;
  qp.A_eq = Eigen::MatrixXd::Zero(2 * (past_u + past_y), k_cols + ny);
  qp.A_eq.block(0, 0, past_u, k_cols) = hu_.topRows(past_u);
  qp.A_eq.block(past_u, k_cols, past_y, past_y) = Eigen::MatrixXd::Identity(past_y, past_y);
  qp.A_eq.block(past_u + past_y, 0, past_u, k_cols) = hu_.bottomRows(past_u);
  qp.A_eq.block(2 * past_u + past_y, k_cols + ny - past_y, past_y, past_y) = Eigen::MatrixXd::Identity(past_y, past_y);
  qp.b_eq = Eigen::VectorXd::Zero(qp.A_eq.rows());

  const auto& uset = base.input_set;
  const Eigen::Index ui = uset.G.rows();
  layout_.input_rows = static_cast<int>(ui * L);
  qp.G = Eigen::MatrixXd::Zero(ui * L, k_cols + ny);
  qp.h.resize(ui * L);
  for (int k = 0; k < L; ++k) {
    qp.G.block(k * ui, 0, ui, k_cols) = uset.G * hu_.middleRows(tl.u_row(k), m);
    qp.h.segment(k * ui, ui) = uset.h;
  }
}

Eigen::VectorXd RobustMpc::pack(const Eigen::VectorXd& alpha_hat, const Eigen::VectorXd& y_hat) const {
  if (alpha_hat.size() != layout_.alpha_dim || y_hat.size() != layout_.y_dim) {
    throw ShapeError("robust decision vector blocks have the wrong size");
  }
  Eigen::VectorXd z(layout_.num_variables());
  z << alpha_hat, y_hat;
  return z;
}

RobustCost RobustMpc::evaluate(const Eigen::VectorXd& alpha_hat, const Eigen::VectorXd& y_hat) const {
  pack(alpha_hat, y_hat);
  const auto& base = config_.base;
  const auto& tl = layout_.trajectory;
  const Eigen::VectorXd u_hat = hu_ * alpha_hat;
  const Eigen::VectorXd sigma = hy_ * alpha_hat - y_hat;
  RobustCost cost;
  for (int k = 0; k < tl.L; ++k) {
    const Eigen::VectorXd uk = u_hat.segment(tl.u_row(k), tl.m);
    const Eigen::VectorXd yk = y_hat.segment(tl.p * (k + tl.n), tl.p);
    cost.tracking += uk.dot(base.R * uk) + yk.dot(base.Q * yk);
  }
  cost.alpha_penalty = config_.alpha_weight() * alpha_hat.squaredNorm();
  cost.sigma_penalty = config_.sigma_weight() * sigma.squaredNorm();
  return cost;
}

AssembledRobust RobustMpc::assemble(const ExtendedState& init) const {
  const auto& tl = layout_.trajectory;
  if (init.n != tl.n || init.u_past.size() != tl.m * tl.n || init.y_past.size() != tl.p * tl.n) {
    throw ShapeError("initial window has dimension " + std::to_string(init.u_past.size() + init.y_past.size()) +
                     ", expected (m + p) n = " + std::to_string((tl.m + tl.p) * tl.n));
  }
  AssembledRobust out{template_, layout_};
  out.qp.b_eq.head(layout_.past_rows) = init.stacked();
  return out;
}

RobustMpcSolution RobustMpc::solve(const ExtendedState& init) const {
  const auto assembled = assemble(init);
  RobustMpcSolution out;
  out.qp = ddmpc::solve(assembled.qp, config_.base.qp);
  out.status = out.qp.status;
  if (!out.optimal()) return out;

  const auto& tl = layout_.trajectory;
  out.alpha_hat = out.qp.z.head(layout_.alpha_dim);
  const Eigen::VectorXd y_hat = out.qp.z.tail(layout_.y_dim);
  const Eigen::VectorXd sigma = hy_ * out.alpha_hat - y_hat;
  out.u_hat = unstack(hu_ * out.alpha_hat, tl.m);
  out.y_hat = unstack(y_hat, tl.p);
  out.sigma_hat = unstack(sigma, tl.p);
  out.breakdown = evaluate(out.alpha_hat, y_hat);
  out.cost = out.breakdown.total();

  out.audit.alpha_sq = out.alpha_hat.squaredNorm();
  out.audit.alpha_bound = out.cost / config_.alpha_weight();
  out.audit.sigma_sq = sigma.squaredNorm();
  out.audit.sigma_bound = out.cost / config_.sigma_weight();
  return out;
}

AssembledRobust assemble_robust(const RobustMpcConfig& config, const ExtendedState& init) {
  return RobustMpc(config).assemble(init);
}

RobustMpcSolution solve_robust(const RobustMpcConfig& config, const ExtendedState& init) {
  return RobustMpc(config).solve(init);
}

}  // namespace ddmpc
