#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ddmpc/mpc_robust.hpp"
#include "ddmpc/plant.hpp"

namespace ddmpc {

enum class Schedule { OneStep, NStep };
Schedule parse_schedule(const std::string& name);
std::string to_string(Schedule s);

/// Additive input disturbance u = u* + d with |d_t|_2 <= bound.
struct DisturbanceSpec {
  double bound = 0.0;
  NoiseDistribution distribution = NoiseDistribution::UniformBall;
  std::uint64_t seed = 0;
  /// Explicit disturbance samples; when set they replace the random stream and
  /// are validated against `bound`.
  std::optional<Sequence> sequence;
};

/// Returns u_opt + d. Throws ValidationError when |d|_2 exceeds `bound`.
Eigen::VectorXd inject_disturbance(const Eigen::VectorXd& u_opt, const Eigen::VectorXd& d, double bound);

struct ClosedLoopConfig {
  StateSpaceModel plant;
  std::variant<NominalMpcConfig, RobustMpcConfig> controller;
  Schedule schedule = Schedule::OneStep;
  int T_sim = 0;
  Eigen::VectorXd x0;  ///< plant state at the start of the warm-up, time -n
  Sequence warmup;     ///< n inputs applied open loop; empty means zeros
  NoiseSpec online_noise;
  std::optional<DisturbanceSpec> disturbance;

  int state_order() const;
};

struct StepRecord {
  int t = 0;
  bool solved = false;  ///< an optimization was run at this step
  QpStatus status = QpStatus::Optimal;
  double cost = 0.0;    ///< optimal cost of the most recent solve
  Eigen::VectorXd u_opt;
  Eigen::VectorXd u_applied;
  Eigen::VectorXd y_true;
  Eigen::VectorXd y_meas;
  Eigen::VectorXd xi;   ///< extended state seen by the controller (measured outputs)
  double xi_norm = 0.0; ///< norm of the extended state built from true outputs
  double solve_seconds = 0.0;
  double kkt_residual = 0.0;  ///< largest KKT residual of an optimal solve at this step
};

struct ClosedLoopSummary {
  bool feasible_throughout = true;
  int failing_step = -1;
  int steps = 0;
  int solves = 0;
  double final_xi_norm = 0.0;
  double limsup_xi_norm = 0.0;  ///< max over the last 20% of the run
  double max_kkt_residual = 0.0;  ///< over all optimal solves
};

struct ClosedLoopTrace {
  int m = 0;
  int p = 0;
  int n = 0;
  std::vector<StepRecord> records;
  Eigen::VectorXd final_xi;  ///< true extended state after the last step
  ClosedLoopSummary summary;
};

ClosedLoopTrace run_closed_loop(const ClosedLoopConfig& config);

/// Largest value over the trailing fraction of a series (at least one sample).
double tail_max(const std::vector<double>& values, double fraction = 0.2);

/// Columns t, u*, u_applied, y_true, y_meas, cost, status, xi_norm; vector
/// signals get one column per component.
void write_trace_csv(std::ostream& out, const ClosedLoopTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const ClosedLoopTrace& trace);
/// Flat key-value block.
std::string format_summary(const ClosedLoopSummary& summary);

}  // namespace ddmpc
