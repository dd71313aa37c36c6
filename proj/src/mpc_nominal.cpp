#include "ddmpc/mpc_nominal.hpp"

#include "ddmpc/errors.hpp"
#include "ddmpc/linalg.hpp"

namespace ddmpc {

Polytope Polytope::whole_space(int dim) {
  return Polytope{Eigen::MatrixXd::Zero(0, dim), Eigen::VectorXd::Zero(0)};
}

Polytope Polytope::box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (lower.size() != upper.size()) {
    throw ShapeError("box bounds have different dimensions");
  }
  const Eigen::Index d = lower.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(lower(i) <= upper(i))) {
      throw ConfigError("box lower bound exceeds upper bound in coordinate " + std::to_string(i));
    }
  }
  Polytope poly;
  poly.G.resize(2 * d, d);
  poly.G << Eigen::MatrixXd::Identity(d, d), -Eigen::MatrixXd::Identity(d, d);
  poly.h.resize(2 * d);
  poly.h << upper, -lower;
  return poly;
}

bool Polytope::contains(const Eigen::VectorXd& v, double tol) const {
  if (unconstrained()) return true;
  return ((G * v - h).array() <= tol).all();
}

bool Polytope::contains_origin_in_interior() const {
  return unconstrained() || (h.array() > 0.0).all();
}

bool Polytope::is_bounded() const {
  if (unconstrained() || numerical_rank(G) < dim()) return false;
  // Stiemke: the recession cone {d : G d <= 0} is trivial iff G'y = 0 has a
  // strictly positive solution. Scale-free test: min |y|^2 s.t. G'y = 0, y >= 1.
  const int rows = static_cast<int>(G.rows());
  auto qp = QuadraticProgram::with_variables(rows);
  qp.P = Eigen::MatrixXd::Identity(rows, rows);
  qp.A_eq = G.transpose();
  qp.b_eq = Eigen::VectorXd::Zero(dim());
  qp.G = -Eigen::MatrixXd::Identity(rows, rows);
  qp.h = -Eigen::VectorXd::Ones(rows);
  return solve(qp).optimal();
}

namespace {

bool positive_definite(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

void check_polytope(const Polytope& poly, int dim, const char* name) {
  if (poly.G.rows() != poly.h.size()) {
    throw ConfigError(std::string(name) + ": G and h have different row counts");
  }
  if (!poly.unconstrained() && poly.G.cols() != dim) {
    throw ConfigError(std::string(name) + ": constraint matrix has " + std::to_string(poly.G.cols()) +
                      " columns, expected " + std::to_string(dim));
  }
}

Eigen::MatrixXd selection(const std::vector<int>& rows, int size) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), size);
  for (std::size_t i = 0; i < rows.size(); ++i) s(static_cast<Eigen::Index>(i), rows[i]) = 1.0;
  return s;
}

}  // namespace

std::vector<std::string> NominalMpcConfig::validate() const {
  std::vector<std::string> warnings;
  if (n < 1) throw ConfigError("state-order bound n must be positive");
  if (L < n) throw ConfigError("horizon L = " + std::to_string(L) + " must be at least n = " + std::to_string(n));
  if (data.size() == 0) throw ConfigError("no data trajectory supplied");
  const int m = data.m();
  const int p = data.p();
  if (Q.rows() != p || !positive_definite(Q)) throw ConfigError("Q must be a symmetric positive definite p x p matrix");
  if (R.rows() != m || !positive_definite(R)) throw ConfigError("R must be a symmetric positive definite m x m matrix");
  check_polytope(input_set, m, "input set");
  check_polytope(output_set, p, "output set");
  if (data.size() < L + n) {
    throw ConfigError("data length " + std::to_string(data.size()) + " is shorter than L + n = " +
                      std::to_string(L + n));
  }
  const auto pe = is_persistently_exciting(data.inputs(), L + 2 * n, rank_tol);
  if (!pe.exciting) {
    const std::string msg = "data input is not persistently exciting of order L + 2n = " +
                            std::to_string(L + 2 * n) + " (rank " + std::to_string(pe.rank) + " of " +
                            std::to_string(pe.required_rank) + ")";
    if (strict_excitation) throw DataQualityError(msg);
    warnings.push_back(msg);
  }
  return warnings;
}

Eigen::MatrixXd trajectory_weight(const TrajectoryLayout& layout, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(layout.size(), layout.size());
  for (int k = 0; k < layout.L; ++k) {
    w.block(layout.u_row(k), layout.u_row(k), layout.m, layout.m) = R;
    w.block(layout.y_row(k), layout.y_row(k), layout.p, layout.p) = Q;
  }
  return w;
}

void split_trajectory(const TrajectoryLayout& layout, const Eigen::VectorXd& w, Sequence& u, Sequence& y) {
  if (w.size() != layout.size()) throw ShapeError("trajectory vector has the wrong size");
  u.clear();
  y.clear();
  for (int k = -layout.n; k < layout.L; ++k) {
    u.emplace_back(w.segment(layout.u_row(k), layout.m));
    y.emplace_back(w.segment(layout.y_row(k), layout.p));
  }
}

NominalMpc::NominalMpc(NominalMpcConfig config) : config_(std::move(config)) {
  warnings_ = config_.validate();
  const int m = config_.data.m();
  const int p = config_.data.p();
  const int L = config_.L;
  const int n = config_.n;
  const int depth = L + n;

  auto& tl = layout_.trajectory;
  tl = TrajectoryLayout{m, p, n, L};

  const auto hu = build_hankel(config_.data.inputs(), depth);
  const auto hy = build_hankel(config_.data.outputs(), depth);
  const int input_rank = numerical_rank(hu.entries, config_.rank_tol);
  if (input_rank < m * depth) {
    throw DataQualityError("input Hankel matrix of depth " + std::to_string(depth) + " has rank " +
                           std::to_string(input_rank) + ", needs full row rank " + std::to_string(m * depth));
  }
  hankel_.resize(hu.entries.rows() + hy.entries.rows(), hu.columns());
  hankel_ << hu.entries, hy.entries;

  const auto ns = null_space_parametrization(hankel_, config_.rank_tol);
  hankel_pinv_ = ns.pinv;
  basis_ = ns.range_basis;
  weight_ = trajectory_weight(tl, config_.Q, config_.R);

  layout_.alpha_dim = hu.columns();
  layout_.trajectory_dim = tl.size();
  layout_.reduced_dim = ns.rank;

  std::vector<int> past;
  std::vector<int> terminal;
  for (int k = -n; k < 0; ++k)
    for (int i = 0; i < m; ++i) past.push_back(tl.u_row(k) + i);
  for (int k = -n; k < 0; ++k)
    for (int i = 0; i < p; ++i) past.push_back(tl.y_row(k) + i);
  for (int k = L - n; k < L; ++k)
    for (int i = 0; i < m; ++i) terminal.push_back(tl.u_row(k) + i);
  for (int k = L - n; k < L; ++k)
    for (int i = 0; i < p; ++i) terminal.push_back(tl.y_row(k) + i);
  layout_.past_rows = static_cast<int>(past.size());
  layout_.terminal_rows = static_cast<int>(terminal.size());

  std::vector<int> eq_rows = past;
  eq_rows.insert(eq_rows.end(), terminal.begin(), terminal.end());

  auto& qp = template_;
  qp = QuadraticProgram::with_variables(ns.rank);
  Eigen::MatrixXd hess = 2.0 * basis_.transpose() * weight_ * basis_;
  qp.P = 0.5 * (hess + hess.transpose());
  qp.A_eq = selection(eq_rows, tl.size()) * basis_;
  qp.b_eq = Eigen::VectorXd::Zero(qp.A_eq.rows());

  const auto& uset = config_.input_set;
  const auto& yset = config_.output_set;
  const Eigen::Index ui = uset.G.rows();
  const Eigen::Index yi = yset.G.rows();
  layout_.input_rows = static_cast<int>(ui * L);
  layout_.output_rows = static_cast<int>(yi * L);
  qp.G.resize(ui * L + yi * L, ns.rank);
  qp.h.resize(ui * L + yi * L);
  for (int k = 0; k < L; ++k) {
    if (ui > 0) {
      qp.G.middleRows(k * ui, ui) = uset.G * basis_.middleRows(tl.u_row(k), m);
      qp.h.segment(k * ui, ui) = uset.h;
    }
    if (yi > 0) {
      qp.G.middleRows(ui * L + k * yi, yi) = yset.G * basis_.middleRows(tl.y_row(k), p);
      qp.h.segment(ui * L + k * yi, yi) = yset.h;
    }
  }
}

void NominalMpc::check_init(const ExtendedState& init) const {
  const auto& tl = layout_.trajectory;
  if (init.n != tl.n || init.u_past.size() != tl.m * tl.n || init.y_past.size() != tl.p * tl.n) {
    throw ShapeError("initial window has dimension " + std::to_string(init.u_past.size() + init.y_past.size()) +
                     ", expected (m + p) n = " + std::to_string((tl.m + tl.p) * tl.n));
  }
}

AssembledNominal NominalMpc::assemble(const ExtendedState& init) const {
  check_init(init);
  AssembledNominal out{template_, layout_};
  out.qp.b_eq.head(layout_.past_rows) = init.stacked();
  return out;
}

double NominalMpc::tracking_cost(const Eigen::VectorXd& trajectory) const {
  return trajectory.dot(weight_ * trajectory);
}

MpcSolution NominalMpc::solve(const ExtendedState& init) const {
  const auto assembled = assemble(init);
  MpcSolution out;
  out.qp = ddmpc::solve(assembled.qp, config_.qp);
  out.status = out.qp.status;
  if (!out.optimal()) return out;
  const Eigen::VectorXd w = basis_ * out.qp.z;
  split_trajectory(layout_.trajectory, w, out.u_bar, out.y_bar);
  out.alpha = hankel_pinv_ * w;
  out.cost = tracking_cost(w);
  return out;
}

AssembledNominal assemble_nominal(const NominalMpcConfig& config, const ExtendedState& init) {
  return NominalMpc(config).assemble(init);
}

MpcSolution solve_nominal(const NominalMpcConfig& config, const ExtendedState& init) {
  return NominalMpc(config).solve(init);
}

}  // namespace ddmpc
