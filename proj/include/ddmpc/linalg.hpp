#pragma once

#include <Eigen/Dense>

namespace ddmpc {

/// Default relative tolerance for numerical rank decisions.
inline constexpr double kDefaultRankTol = 1e-9;

/// Rank of `m`, counting singular values above `rel_tol * sigma_max`.
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTol);

/// Moore-Penrose inverse via SVD. Singular values below `rel_tol * sigma_max`
/// are treated as zero.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTol);

/// Orthogonal decomposition of a linear map H : R^k -> R^r.
///
/// Every solution of `H a = z` (for z in the range of H) is
/// `a = pinv * z + null_basis * w`, and the two parts are orthogonal, so
/// `|a|^2 = |pinv z|^2 + |null_basis w|^2`.
struct NullSpaceParametrization {
  Eigen::MatrixXd pinv;         ///< k x r
  Eigen::MatrixXd null_basis;   ///< k x (k - rank), orthonormal columns
  Eigen::MatrixXd range_basis;  ///< r x rank, orthonormal columns spanning range(H)
  Eigen::VectorXd singular_values;
  int rank = 0;
};

NullSpaceParametrization null_space_parametrization(const Eigen::MatrixXd& h,
                                                    double rel_tol = kDefaultRankTol);

/// Residuals of the four Penrose identities, max-abs entry of each.
struct PenroseResiduals {
  double a_x_a = 0.0;  ///< |A X A - A|
  double x_a_x = 0.0;  ///< |X A X - X|
  double ax_sym = 0.0; ///< |(A X)^T - A X|
  double xa_sym = 0.0; ///< |(X A)^T - X A|
  double max() const;
};

PenroseResiduals penrose_residuals(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x);

/// Block-diagonal matrix with `count` copies of `block`.
Eigen::MatrixXd repeat_block_diagonal(const Eigen::MatrixXd& block, int count);

}  // namespace ddmpc
