#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "ddmpc/signals.hpp"

namespace ddmpc {

/// Discrete-time LTI system x+ = A x + B u, y = C x + D u.
struct StateSpaceModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;

  StateSpaceModel() = default;
  /// Checks dimensional consistency only; see `require_minimal` for the
  /// controllability/observability invariant.
  StateSpaceModel(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c, Eigen::MatrixXd d);

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }

  /// Throws ConfigError unless (A, B) is controllable and (A, C) observable.
  const StateSpaceModel& require_minimal(double rel_tol = kDefaultRankTol) const;
};

struct StructuralRanks {
  int controllability = 0;
  int observability = 0;
};

/// Ranks of [B, AB, ..., A^{n-1}B] and [C; CA; ...; CA^{n-1}].
StructuralRanks structural_ranks(const StateSpaceModel& model, double rel_tol = kDefaultRankTol);

Eigen::MatrixXd controllability_matrix(const StateSpaceModel& model);
Eigen::MatrixXd observability_matrix(const StateSpaceModel& model);

struct SimulationResult {
  Sequence states;   ///< x_0 .. x_N (one more than inputs)
  Sequence outputs;  ///< y_0 .. y_{N-1}
};

SimulationResult simulate(const StateSpaceModel& model, const Eigen::VectorXd& x0, const Sequence& u);

enum class NoiseDistribution { UniformBall, TruncatedGaussian };

NoiseDistribution parse_noise_distribution(const std::string& name);
std::string to_string(NoiseDistribution d);

/// Bounded additive noise: every sample e satisfies |e|_2 <= bound.
struct NoiseSpec {
  double bound = 0.0;
  NoiseDistribution distribution = NoiseDistribution::UniformBall;
  std::uint64_t seed = 0;
};

/// Seeded generator of bounded vectors in R^dim.
class BoundedNoise {
 public:
  BoundedNoise(NoiseSpec spec, int dim);
  Eigen::VectorXd next();
  const NoiseSpec& spec() const { return spec_; }

 private:
  NoiseSpec spec_;
  int dim_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Generated data together with the quantities only a simulator knows.
struct GeneratedData {
  TrajectoryData data;  ///< inputs, noisy outputs, clean outputs
  Sequence states;      ///< x_0 .. x_N
  Sequence noise;       ///< output noise samples
};

/// Simulates the model and adds bounded output noise y~ = y + e.
GeneratedData generate_data(const StateSpaceModel& model, const Sequence& input, const Eigen::VectorXd& x0,
                            const NoiseSpec& noise);

/// Seeded +-1 sequence of length `length` with `m` channels.
Sequence pseudo_random_binary(int m, int length, std::uint64_t seed);

/// Deterministic derivation of independent stream seeds from one root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index = 0);

/// x+ = 0.5 x + u, y = x.
StateSpaceModel scalar_test_plant();
/// Double integrator with unit sampling time, output = position.
StateSpaceModel double_integrator_plant();

/// Flat key-value text: `n`, `m`, `p` and row-major entries under `A`, `B`, `C`, `D`.
void write_model(const std::filesystem::path& path, const StateSpaceModel& model);
StateSpaceModel read_model(const std::filesystem::path& path);

}  // namespace ddmpc
