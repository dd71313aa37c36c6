#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <vector>

#include "ddmpc/linalg.hpp"

namespace ddmpc {

/// Time-ordered sequence of equally sized vectors.
using Sequence = std::vector<Eigen::VectorXd>;

/// Common dimension of all elements; throws ShapeError on mismatch or empty input.
int element_dimension(const Sequence& seq);

/// Stacks all elements of `seq` into one vector, oldest first.
Eigen::VectorXd stack(const Sequence& seq);

/// Splits a stacked vector into `count` blocks of size `dim`.
Sequence unstack(const Eigen::VectorXd& stacked, int dim);

/// Sequence of `count` zero vectors of dimension `dim`.
Sequence zeros(int dim, int count);

/// One measured input-output trajectory {u_k, y_k}, k = 0..N-1.
///
/// `outputs()` are the values available to the controller (possibly noisy);
/// `clean_outputs()` holds the noise-free outputs when they are known, which
/// is only the case for synthetic data.
class TrajectoryData {
 public:
  TrajectoryData() = default;
  TrajectoryData(Sequence u, Sequence y, std::optional<Sequence> y_clean = std::nullopt);

  const Sequence& inputs() const { return u_; }
  const Sequence& outputs() const { return y_; }
  const std::optional<Sequence>& clean_outputs() const { return y_clean_; }

  int m() const { return m_; }
  int p() const { return p_; }
  int size() const { return static_cast<int>(u_.size()); }

  /// Same inputs, clean outputs promoted to measured outputs.
  TrajectoryData noise_free() const;

 private:
  Sequence u_;
  Sequence y_;
  std::optional<Sequence> y_clean_;
  int m_ = 0;
  int p_ = 0;
};

/// Block-Hankel matrix of depth `depth` built from a sequence of q-vectors.
struct HankelMatrix {
  Eigen::MatrixXd entries;  ///< (q * depth) x (N - depth + 1)
  int depth = 0;
  int block_dim = 0;

  int columns() const { return static_cast<int>(entries.cols()); }
  /// Rows belonging to the time offsets [first, first + count).
  Eigen::MatrixXd block_rows(int first, int count) const {
    return entries.middleRows(static_cast<Eigen::Index>(first) * block_dim,
                              static_cast<Eigen::Index>(count) * block_dim);
  }
};

/// H_L(seq): block (i, j) equals seq[i + j].
HankelMatrix build_hankel(const Sequence& seq, int depth);

struct PeReport {
  bool exciting = false;
  int rank = 0;
  int required_rank = 0;
  double min_singular_value = 0.0;  ///< smallest of the m*order leading singular values
};

/// Persistence of excitation of order `order`: rank(H_order(seq)) == m * order.
PeReport is_persistently_exciting(const Sequence& seq, int order, double rel_tol = kDefaultRankTol);

/// Window seq_[a, b] stacked in increasing time order.
Eigen::VectorXd extract_window(const Sequence& seq, int a, int b);

/// Extended (non-minimal) state: the last n inputs stacked above the last n outputs.
struct ExtendedState {
  Eigen::VectorXd u_past;  ///< u_{t-n}, ..., u_{t-1}
  Eigen::VectorXd y_past;  ///< y_{t-n}, ..., y_{t-1}
  int n = 0;

  int m() const { return n == 0 ? 0 : static_cast<int>(u_past.size()) / n; }
  int p() const { return n == 0 ? 0 : static_cast<int>(y_past.size()) / n; }
  Eigen::VectorXd stacked() const;
  double norm() const { return stacked().norm(); }

  static ExtendedState from_stacked(const Eigen::VectorXd& xi, int m, int p, int n);
  static ExtendedState zero(int m, int p, int n);
};

/// Builds the extended state from the tails of the histories (last element is t-1).
ExtendedState extended_state(const Sequence& u_hist, const Sequence& y_hist, int n);

struct MembershipResult {
  double residual = 0.0;
  Eigen::VectorXd alpha;       ///< minimum-norm minimizer
  bool excitation_sufficient = true;  ///< inputs PE of order L + n (when n was supplied)
};

/// min_a |[H_L(u^d); H_L(y^d)] a - [u; y]|_2 for a candidate trajectory of length L.
/// When `state_order` is given, the exactness precondition (PE of order L + n) is
/// checked and reported through `excitation_sufficient`.
MembershipResult membership_residual(const TrajectoryData& data, const TrajectoryData& candidate,
                                     std::optional<int> state_order = std::nullopt,
                                     double rel_tol = kDefaultRankTol);

/// CSV with header `t,u_0..u_{m-1},y_0..y_{p-1}`, plus `y_clean_*` columns when
/// clean outputs are present.
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryData& data);
TrajectoryData read_trajectory_csv(const std::filesystem::path& path);

}  // namespace ddmpc
