#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddmpc/loop.hpp"

namespace ddmpc {

/// Independent random streams split from one root seed.
enum class Stream : std::uint64_t { DataInput = 1, OfflineNoise = 2, OnlineNoise = 3, Disturbance = 4, Sampling = 5 };

std::uint64_t stream_seed(std::uint64_t root, Stream stream, std::uint64_t index = 0);

/// Everything needed to generate data, build either controller and run a loop.
struct ExperimentSetup {
  StateSpaceModel plant;
  int L = 0;
  int n = 0;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Polytope input_set;
  Polytope output_set;  ///< nominal controller only
  int data_length = 0;
  Eigen::VectorXd data_x0;
  double data_amplitude = 1.0;  ///< scale of the +-1 excitation
  double lambda_alpha = 1.0;
  double lambda_sigma = 1.0;
  double beta_alpha = 0.5;
  double beta_sigma = 0.5;
  NoiseDistribution distribution = NoiseDistribution::UniformBall;
  Eigen::VectorXd x0;  ///< closed-loop state at time -n
  int T_sim = 50;
  Schedule schedule = Schedule::OneStep;
  std::uint64_t seed = 1;
};

/// x+ = 0.5 x + u, L = 8, n = 1, |u| <= 5, 60 data points, x0 = 1.
ExperimentSetup scalar_setup();
/// Double integrator, L = 10, n = 2, |u| <= 1, 40 data points, x0 = (1, 0).
ExperimentSetup double_integrator_setup();

/// Offline data: the input is fixed by the root seed, the noise realization by
/// `noise_index`, so sweeps over the bound rescale one noise pattern.
GeneratedData generate_setup_data(const ExperimentSetup& setup, double eps_bar, std::uint64_t noise_index = 0);
NominalMpcConfig nominal_config(const ExperimentSetup& setup, const TrajectoryData& data);
RobustMpcConfig robust_config(const ExperimentSetup& setup, const TrajectoryData& data, double eps_bar);

/// True extended state after applying `warmup` (zeros when empty) from x0 at
/// time -n, together with the state at time -n and at time 0.
struct InitialWindow {
  ExtendedState xi;
  Eigen::VectorXd x_start;  ///< state at time -n
  Eigen::VectorXd x_now;    ///< state at time 0
};
InitialWindow initial_window(const StateSpaceModel& plant, const Eigen::VectorXd& x0, const Sequence& warmup, int n);

/// Random initial window: random state at time -n and random inputs of the
/// given magnitude over the n past steps.
InitialWindow random_initial_window(const StateSpaceModel& plant, int n, std::mt19937_64& rng, double state_scale,
                                    double input_scale);

/// Adds bounded noise to the output block of an extended state.
ExtendedState perturb_outputs(const ExtendedState& xi, BoundedNoise& noise);

/// Solves the same optimal control problem with explicit state-space dynamics
/// in place of the Hankel parametrization. The combination vector is left empty.
MpcSolution model_based_oracle(const StateSpaceModel& model, const NominalMpcConfig& config, const ExtendedState& init);

struct CostDecreaseAudit {
  std::vector<double> margins;  ///< J(t+1) - J(t) + |u_t|_R^2 + |y_t|_Q^2
  double max_margin = 0.0;
  /// Largest difference between an independent re-solve at each recorded
  /// extended state and the cost stored in the trace.
  double resolve_mismatch = 0.0;
};

/// Requires a noise-free, undisturbed one-step nominal trace.
CostDecreaseAudit cost_decrease_audit(const ClosedLoopTrace& trace, const NominalMpcConfig& config);

struct Candidate {
  Eigen::VectorXd alpha_hat;
  Eigen::VectorXd y_hat;
  Eigen::VectorXd sigma_hat;
  RobustCost cost;
  double violation = 0.0;  ///< largest constraint violation in the robust program
  bool feasible = false;
};

/// Feasible point for the robust program built from the nominal optimum and
/// the true state trajectory of the data: u_hat = u*, y_hat = [measured past;
/// y*], alpha = pinv([H(u); H_1(x)]) [u*; x_{t-n}], sigma from the residual.
Candidate candidate_construction(const RobustMpc& robust, const Sequence& data_states, const MpcSolution& nominal,
                                 const ExtendedState& noisy_init, const Eigen::VectorXd& x_start,
                                 double feas_tol = 1e-8);

struct ExponentialFit {
  double rho = 0.0;
  double constant = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Least-squares fit of log v_t = log C + t log rho over samples above `floor`.
ExponentialFit fit_exponential(const std::vector<double>& values, double floor = 1e-11);

/// values[i + 1] >= (1 - ripple) values[i] for every adjacent pair.
bool monotone_nondecreasing(const std::vector<double>& values, double ripple = 0.1);

struct SweepReport {
  std::string parameter;  ///< eps_bar or d_bar
  std::string metric;
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> feasibility;  ///< fraction of feasible runs per point
  int seeds = 0;
  double ripple = 0.1;
  bool monotone = false;
  bool verdict = false;
  double max_kkt_residual = 0.0;  ///< over every optimal solve in the sweep
  std::vector<std::string> notes;
};

/// Deviation |u_hat* - u_bar*|_2 between robust (noisy data and window) and
/// nominal (clean data and window) solutions at the setup's initial window.
SweepReport continuity_sweep(const ExperimentSetup& setup, const std::vector<double>& eps_grid, int seeds);

/// Exploratory: the same deviation at a fixed noise bound as a function of the
/// data excitation amplitude. The verdict is always true; there is no bound.
SweepReport excitation_sweep(const ExperimentSetup& setup, const std::vector<double>& amplitudes, double eps_bar,
                             int seeds);

/// limsup |xi_t| of the robust n-step loop per noise level. The verdict also
/// requires the smallest-noise value to be at most `floor`.
SweepReport practical_stability_sweep(const ExperimentSetup& setup, const std::vector<double>& eps_grid, int seeds,
                                      double floor = 1e-2);

/// Feasibility and limsup |xi_t| of the nominal n-step loop under input
/// disturbances. The verdict requires all runs with d_bar <= `feasible_below`
/// to stay feasible.
SweepReport inherent_robustness_sweep(const ExperimentSetup& setup, const std::vector<double>& d_grid, int seeds,
                                      double feasible_below);

struct DisturbanceThreshold {
  double feasible = 0.0;    ///< largest tested d_bar with every seed feasible
  double infeasible = 0.0;  ///< smallest tested d_bar with a failing seed; 0 if none failed
  int evaluations = 0;
};

/// Empirical feasibility threshold of the nominal n-step loop under input
/// disturbances: geometric bisection on d_bar in (0, d_max]. Each seed keeps
/// one disturbance pattern scaled by d_bar.
DisturbanceThreshold disturbance_threshold(const ExperimentSetup& setup, double d_max, int seeds,
                                           int iterations = 30);

/// limsup |xi_t| of the noise-free, undisturbed nominal n-step loop.
double nominal_baseline_limsup(const ExperimentSetup& setup);

void write_report_csv(std::ostream& out, const SweepReport& report);
void write_report_csv(const std::filesystem::path& path, const SweepReport& report);
std::string format_verdict(const SweepReport& report);

}  // namespace ddmpc
