#include "ddmpc/linalg.hpp"

#include <algorithm>

namespace ddmpc {

namespace {

int rank_from_singular_values(const Eigen::VectorXd& s, double rel_tol) {
  if (s.size() == 0 || s(0) <= 0.0) {
    return 0;
  }
  const double threshold = rel_tol * s(0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) {
      ++r;
    }
  }
  return r;
}

}  // namespace

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) {
    return 0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return rank_from_singular_values(svd.singularValues(), rel_tol);
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) {
    return Eigen::MatrixXd::Zero(m.cols(), m.rows());
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const int r = rank_from_singular_values(s, rel_tol);
  const Eigen::MatrixXd v = svd.matrixV().leftCols(r);
  const Eigen::MatrixXd u = svd.matrixU().leftCols(r);
  return v * s.head(r).cwiseInverse().asDiagonal() * u.transpose();
}

NullSpaceParametrization null_space_parametrization(const Eigen::MatrixXd& h, double rel_tol) {
  NullSpaceParametrization out;
  const Eigen::Index rows = h.rows();
  const Eigen::Index cols = h.cols();
  if (h.size() == 0) {
    out.pinv = Eigen::MatrixXd::Zero(cols, rows);
    out.null_basis = Eigen::MatrixXd::Identity(cols, cols);
    out.range_basis = Eigen::MatrixXd::Zero(rows, 0);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const int r = rank_from_singular_values(s, rel_tol);
  out.rank = r;
  out.singular_values = s;
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();
  out.pinv = v.leftCols(r) * s.head(r).cwiseInverse().asDiagonal() * u.leftCols(r).transpose();
  out.null_basis = v.rightCols(cols - r);
  out.range_basis = u.leftCols(r);
  return out;
}

double PenroseResiduals::max() const {
  return std::max({a_x_a, x_a_x, ax_sym, xa_sym});
}

PenroseResiduals penrose_residuals(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x) {
  PenroseResiduals r;
  const Eigen::MatrixXd ax = a * x;
  const Eigen::MatrixXd xa = x * a;
  auto max_abs = [](const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); };
  r.a_x_a = max_abs(ax * a - a);
  r.x_a_x = max_abs(xa * x - x);
  r.ax_sym = max_abs(ax.transpose() - ax);
  r.xa_sym = max_abs(xa.transpose() - xa);
  return r;
}

Eigen::MatrixXd repeat_block_diagonal(const Eigen::MatrixXd& block, int count) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(block.rows() * count, block.cols() * count);
  for (int i = 0; i < count; ++i) {
    out.block(i * block.rows(), i * block.cols(), block.rows(), block.cols()) = block;
  }
  return out;
}

}  // namespace ddmpc
