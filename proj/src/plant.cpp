#include "ddmpc/plant.hpp"

#include <cmath>
#include <fstream>

#include "ddmpc/config.hpp"
#include "ddmpc/errors.hpp"
#include "ddmpc/text.hpp"

namespace ddmpc {

StateSpaceModel::StateSpaceModel(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c, Eigen::MatrixXd d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw ShapeError("A must be square and non-empty");
  }
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw ShapeError("B must have n rows and at least one column");
  }
  if (C.cols() != A.rows() || C.rows() == 0) {
    throw ShapeError("C must have n columns and at least one row");
  }
  if (D.rows() != C.rows() || D.cols() != B.cols()) {
    throw ShapeError("D must be p x m");
  }
}

const StateSpaceModel& StateSpaceModel::require_minimal(double rel_tol) const {
  const auto ranks = structural_ranks(*this, rel_tol);
  if (ranks.controllability < n()) {
    throw ConfigError("(A, B) is not controllable: rank " + std::to_string(ranks.controllability) + " < " +
                      std::to_string(n()));
  }
  if (ranks.observability < n()) {
    throw ConfigError("(A, C) is not observable: rank " + std::to_string(ranks.observability) + " < " +
                      std::to_string(n()));
  }
  return *this;
}

Eigen::MatrixXd controllability_matrix(const StateSpaceModel& model) {
  const int n = model.n();
  const int m = model.m();
  Eigen::MatrixXd ctrb(n, static_cast<Eigen::Index>(n) * m);
  Eigen::MatrixXd block = model.B;
  for (int k = 0; k < n; ++k) {
    ctrb.middleCols(static_cast<Eigen::Index>(k) * m, m) = block;
    block = model.A * block;
  }
  return ctrb;
}

Eigen::MatrixXd observability_matrix(const StateSpaceModel& model) {
  const int n = model.n();
  const int p = model.p();
  Eigen::MatrixXd obsv(static_cast<Eigen::Index>(n) * p, n);
  Eigen::MatrixXd block = model.C;
  for (int k = 0; k < n; ++k) {
    obsv.middleRows(static_cast<Eigen::Index>(k) * p, p) = block;
    block = block * model.A;
  }
  return obsv;
}

StructuralRanks structural_ranks(const StateSpaceModel& model, double rel_tol) {
  return {numerical_rank(controllability_matrix(model), rel_tol),
          numerical_rank(observability_matrix(model), rel_tol)};
}

SimulationResult simulate(const StateSpaceModel& model, const Eigen::VectorXd& x0, const Sequence& u) {
  if (x0.size() != model.n()) {
    throw ShapeError("initial state has dimension " + std::to_string(x0.size()) + ", expected " +
                     std::to_string(model.n()));
  }
  SimulationResult out;
  out.states.reserve(u.size() + 1);
  out.outputs.reserve(u.size());
  Eigen::VectorXd x = x0;
  out.states.push_back(x);
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u[k].size() != model.m()) {
      throw ShapeError("input " + std::to_string(k) + " has dimension " + std::to_string(u[k].size()) +
                       ", expected " + std::to_string(model.m()));
    }
    out.outputs.emplace_back(model.C * x + model.D * u[k]);
    x = model.A * x + model.B * u[k];
    out.states.push_back(x);
  }
  return out;
}

NoiseDistribution parse_noise_distribution(const std::string& name) {
  if (name == "uniform-ball") return NoiseDistribution::UniformBall;
  if (name == "truncated-gaussian") return NoiseDistribution::TruncatedGaussian;
  throw ConfigError("unknown noise distribution '" + name + "' (use uniform-ball or truncated-gaussian)");
}

std::string to_string(NoiseDistribution d) {
  return d == NoiseDistribution::UniformBall ? "uniform-ball" : "truncated-gaussian";
}

BoundedNoise::BoundedNoise(NoiseSpec spec, int dim) : spec_(spec), dim_(dim), rng_(spec.seed) {
  if (!(spec_.bound >= 0.0) || !std::isfinite(spec_.bound)) {
    throw ConfigError("noise bound must be a finite nonnegative number");
  }
  if (dim_ <= 0) {
    throw ShapeError("noise dimension must be positive");
  }
}

Eigen::VectorXd BoundedNoise::next() {
  Eigen::VectorXd e(dim_);
  if (spec_.distribution == NoiseDistribution::UniformBall) {
    for (int i = 0; i < dim_; ++i) e(i) = normal_(rng_);
    const double norm = e.norm();
    const double radius = spec_.bound * std::pow(uniform_(rng_), 1.0 / dim_);
    if (norm > 0.0) {
      e *= radius / norm;
    }
  } else {
    // Rejection sampling; sigma chosen so that roughly 95% of draws are accepted.
    const double sigma = spec_.bound / (2.0 * std::sqrt(static_cast<double>(dim_)));
    do {
      for (int i = 0; i < dim_; ++i) e(i) = sigma * normal_(rng_);
    } while (e.norm() > spec_.bound);
  }
  // Guard the bound against rounding in the rescale.
  const double norm = e.norm();
  if (norm > spec_.bound) {
    e *= spec_.bound / norm;
  }
  return e;
}

GeneratedData generate_data(const StateSpaceModel& model, const Sequence& input, const Eigen::VectorXd& x0,
                            const NoiseSpec& noise) {
  if (noise.bound < 0.0) {
    throw ConfigError("noise bound must be nonnegative");
  }
  if (input.empty()) {
    throw ShapeError("input sequence is empty");
  }
  SimulationResult sim = simulate(model, x0, input);
  BoundedNoise gen(noise, model.p());
  Sequence noisy;
  Sequence eps;
  noisy.reserve(input.size());
  eps.reserve(input.size());
  for (const auto& y : sim.outputs) {
    Eigen::VectorXd e = gen.next();
    noisy.emplace_back(y + e);
    eps.push_back(std::move(e));
  }
  GeneratedData out{TrajectoryData(input, std::move(noisy), sim.outputs), std::move(sim.states), std::move(eps)};
  return out;
}

Sequence pseudo_random_binary(int m, int length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  Sequence u;
  u.reserve(static_cast<std::size_t>(length));
  for (int k = 0; k < length; ++k) {
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v(i) = coin(rng) ? 1.0 : -1.0;
    u.push_back(std::move(v));
  }
  return u;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(root), static_cast<std::uint32_t>(root >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

StateSpaceModel scalar_test_plant() {
  return StateSpaceModel(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::MatrixXd::Constant(1, 1, 1.0),
                         Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Zero(1, 1));
}

StateSpaceModel double_integrator_plant() {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 1.0,
       0.0, 1.0;
  Eigen::MatrixXd b(2, 1);
  b << 0.5, 1.0;
  Eigen::MatrixXd c(1, 2);
  c << 1.0, 0.0;
  return StateSpaceModel(a, b, c, Eigen::MatrixXd::Zero(1, 1));
}

namespace {

std::string matrix_entries(const Eigen::MatrixXd& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!s.empty()) s += ' ';
      s += text::format_double(m(i, j));
    }
  }
  return s;
}

}  // namespace

void write_model(const std::filesystem::path& path, const StateSpaceModel& model) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << "n = " << model.n() << '\n'
      << "m = " << model.m() << '\n'
      << "p = " << model.p() << '\n'
      << "A = " << matrix_entries(model.A) << '\n'
      << "B = " << matrix_entries(model.B) << '\n'
      << "C = " << matrix_entries(model.C) << '\n'
      << "D = " << matrix_entries(model.D) << '\n';
}

StateSpaceModel read_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("plant file '" + path.string() + "' does not exist");
  }
  const auto cfg = KeyValueConfig::load(path);
  const auto n = cfg.get_int("n");
  const auto m = cfg.get_int("m");
  const auto p = cfg.get_int("p");
  if (n <= 0 || m <= 0 || p <= 0) {
    throw ConfigError("plant dimensions must be positive in " + path.string());
  }
  Eigen::MatrixXd d = cfg.has("D") ? cfg.get_matrix("D", p, m) : Eigen::MatrixXd::Zero(p, m);
  return StateSpaceModel(cfg.get_matrix("A", n, n), cfg.get_matrix("B", n, m), cfg.get_matrix("C", p, n), d);
}

}  // namespace ddmpc
