#include "ddmpc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include "ddmpc/errors.hpp"
#include "ddmpc/linalg.hpp"
#include "ddmpc/text.hpp"

namespace ddmpc {

std::uint64_t stream_seed(std::uint64_t root, Stream stream, std::uint64_t index) {
  return derive_seed(root, static_cast<std::uint64_t>(stream), index);
}

ExperimentSetup scalar_setup() {
  ExperimentSetup s;
  s.plant = scalar_test_plant();
  s.L = 8;
  s.n = 1;
  s.Q = Eigen::MatrixXd::Identity(1, 1);
  s.R = Eigen::MatrixXd::Identity(1, 1);
  s.input_set = Polytope::box(Eigen::VectorXd::Constant(1, -5.0), Eigen::VectorXd::Constant(1, 5.0));
  s.output_set = Polytope::whole_space(1);
  s.data_length = 60;
  s.data_x0 = Eigen::VectorXd::Zero(1);
  s.x0 = Eigen::VectorXd::Ones(1);
  return s;
}

ExperimentSetup double_integrator_setup() {
  ExperimentSetup s;
  s.plant = double_integrator_plant();
  s.L = 10;
  s.n = 2;
  s.Q = Eigen::MatrixXd::Identity(1, 1);
  s.R = Eigen::MatrixXd::Identity(1, 1);
  s.input_set = Polytope::box(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0));
  s.output_set = Polytope::whole_space(1);
  s.data_length = 40;
  s.data_x0 = Eigen::VectorXd::Zero(2);
  s.x0 = Eigen::Vector2d(1.0, 0.0);
  return s;
}

GeneratedData generate_setup_data(const ExperimentSetup& setup, double eps_bar, std::uint64_t noise_index) {
  Sequence input = pseudo_random_binary(setup.plant.m(), setup.data_length, stream_seed(setup.seed, Stream::DataInput));
  for (auto& u : input) u *= setup.data_amplitude;
  const NoiseSpec noise{eps_bar, setup.distribution, stream_seed(setup.seed, Stream::OfflineNoise, noise_index)};
  return generate_data(setup.plant, input, setup.data_x0, noise);
}

NominalMpcConfig nominal_config(const ExperimentSetup& setup, const TrajectoryData& data) {
  NominalMpcConfig c;
  c.L = setup.L;
  c.n = setup.n;
  c.Q = setup.Q;
  c.R = setup.R;
  c.input_set = setup.input_set;
  c.output_set = setup.output_set.unconstrained() ? Polytope::whole_space(data.p()) : setup.output_set;
  c.data = data;
  return c;
}

RobustMpcConfig robust_config(const ExperimentSetup& setup, const TrajectoryData& data, double eps_bar) {
  RobustMpcConfig c;
  c.base = nominal_config(setup, data);
  c.base.output_set = Polytope::whole_space(data.p());
  c.lambda_alpha = setup.lambda_alpha;
  c.lambda_sigma = setup.lambda_sigma;
  c.beta_alpha = setup.beta_alpha;
  c.beta_sigma = setup.beta_sigma;
  c.eps_bar = eps_bar;
  return c;
}

InitialWindow initial_window(const StateSpaceModel& plant, const Eigen::VectorXd& x0, const Sequence& warmup, int n) {
  const Sequence u = warmup.empty() ? zeros(plant.m(), n) : warmup;
  if (static_cast<int>(u.size()) != n) throw ConfigError("warm-up must contain exactly n inputs");
  const auto sim = simulate(plant, x0, u);
  return InitialWindow{extended_state(u, sim.outputs, n), x0, sim.states.back()};
}

InitialWindow random_initial_window(const StateSpaceModel& plant, int n, std::mt19937_64& rng, double state_scale,
                                    double input_scale) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::VectorXd x(plant.n());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = state_scale * normal(rng);
  Sequence u;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd uk(plant.m());
    for (Eigen::Index i = 0; i < uk.size(); ++i) uk(i) = input_scale * uniform(rng);
    u.push_back(uk);
  }
  return initial_window(plant, x, u, n);
}

ExtendedState perturb_outputs(const ExtendedState& xi, BoundedNoise& noise) {
  ExtendedState out = xi;
  const int p = xi.p();
  for (int k = 0; k < xi.n; ++k) out.y_past.segment(k * p, p) += noise.next();
  return out;
}

MpcSolution model_based_oracle(const StateSpaceModel& model, const NominalMpcConfig& config, const ExtendedState& init) {
  const int nx = model.n();
  const int m = model.m();
  const int p = model.p();
  const int L = config.L;
  const int n = config.n;
  const TrajectoryLayout tl{m, p, n, L};
  if (init.u_past.size() != m * n || init.y_past.size() != p * n) {
    throw ShapeError("initial window does not match the model dimensions");
  }
  const int steps = L + n;
  const int xdim = nx * steps;
  const int nvar = xdim + tl.size();
  auto x_col = [&](int k) { return nx * (k + n); };
  auto u_col = [&](int k) { return xdim + tl.u_row(k); };
  auto y_col = [&](int k) { return xdim + tl.y_row(k); };

  auto qp = QuadraticProgram::with_variables(nvar);
  qp.P.bottomRightCorner(tl.size(), tl.size()) = 2.0 * trajectory_weight(tl, config.Q, config.R);

  const int dyn_rows = nx * (steps - 1);
  const int out_rows = p * steps;
  const int past_rows = (m + p) * n;
  const int term_rows = (m + p) * n;
  qp.A_eq = Eigen::MatrixXd::Zero(dyn_rows + out_rows + past_rows + term_rows, nvar);
  qp.b_eq = Eigen::VectorXd::Zero(qp.A_eq.rows());
  int row = 0;
  for (int k = -n; k < L - 1; ++k, row += nx) {
    qp.A_eq.block(row, x_col(k + 1), nx, nx) = Eigen::MatrixXd::Identity(nx, nx);
    qp.A_eq.block(row, x_col(k), nx, nx) = -model.A;
    qp.A_eq.block(row, u_col(k), nx, m) = -model.B;
  }
  for (int k = -n; k < L; ++k, row += p) {
    qp.A_eq.block(row, y_col(k), p, p) = Eigen::MatrixXd::Identity(p, p);
    qp.A_eq.block(row, x_col(k), p, nx) = -model.C;
    qp.A_eq.block(row, u_col(k), p, m) -= model.D;
  }
  for (int k = -n; k < 0; ++k, row += m) {
    qp.A_eq.block(row, u_col(k), m, m) = Eigen::MatrixXd::Identity(m, m);
    qp.b_eq.segment(row, m) = init.u_past.segment(m * (k + n), m);
  }
  for (int k = -n; k < 0; ++k, row += p) {
    qp.A_eq.block(row, y_col(k), p, p) = Eigen::MatrixXd::Identity(p, p);
    qp.b_eq.segment(row, p) = init.y_past.segment(p * (k + n), p);
  }
  for (int k = L - n; k < L; ++k, row += m) qp.A_eq.block(row, u_col(k), m, m) = Eigen::MatrixXd::Identity(m, m);
  for (int k = L - n; k < L; ++k, row += p) qp.A_eq.block(row, y_col(k), p, p) = Eigen::MatrixXd::Identity(p, p);

  const auto& uset = config.input_set;
  const auto& yset = config.output_set;
  const Eigen::Index ui = uset.G.rows();
  const Eigen::Index yi = yset.G.rows();
  qp.G = Eigen::MatrixXd::Zero((ui + yi) * L, nvar);
  qp.h.resize((ui + yi) * L);
  for (int k = 0; k < L; ++k) {
    if (ui > 0) {
      qp.G.block(k * ui, u_col(k), ui, m) = uset.G;
      qp.h.segment(k * ui, ui) = uset.h;
    }
    if (yi > 0) {
      qp.G.block(ui * L + k * yi, y_col(k), yi, p) = yset.G;
      qp.h.segment(ui * L + k * yi, yi) = yset.h;
    }
  }

  MpcSolution out;
  out.qp = solve(qp, config.qp);
  out.status = out.qp.status;
  if (!out.optimal()) return out;
  const Eigen::VectorXd w = out.qp.z.tail(tl.size());
  split_trajectory(tl, w, out.u_bar, out.y_bar);
  out.cost = w.dot(trajectory_weight(tl, config.Q, config.R) * w);
  return out;
}

CostDecreaseAudit cost_decrease_audit(const ClosedLoopTrace& trace, const NominalMpcConfig& config) {
  if (!trace.summary.feasible_throughout) throw PreconditionError("trace is not feasible throughout");
  for (const auto& r : trace.records) {
    if (!r.solved || r.status != QpStatus::Optimal) {
      throw PreconditionError("cost audit needs a one-step trace with a solve at every step");
    }
    if (r.u_applied != r.u_opt || r.y_meas != r.y_true) {
      throw PreconditionError("cost audit needs a noise-free, undisturbed trace");
    }
  }
  const NominalMpc mpc(config);
  const int n = trace.n;
  CostDecreaseAudit audit;
  audit.max_margin = -std::numeric_limits<double>::infinity();
  const std::size_t count = trace.records.size();
  for (std::size_t t = 0; t < count; ++t) {
    const auto& r = trace.records[t];
    const auto resolved = mpc.solve(ExtendedState::from_stacked(r.xi, trace.m, trace.p, n));
    if (!resolved.optimal()) throw PreconditionError("re-solve failed at a recorded extended state");
    audit.resolve_mismatch = std::max(audit.resolve_mismatch, std::abs(resolved.cost - r.cost));
  }
  for (std::size_t t = 0; t < count; ++t) {
    const auto& r = trace.records[t];
    double next = 0.0;
    if (t + 1 < count) {
      next = trace.records[t + 1].cost;
    } else {
      const auto final_solution = mpc.solve(ExtendedState::from_stacked(trace.final_xi, trace.m, trace.p, n));
      if (!final_solution.optimal()) throw PreconditionError("final extended state is infeasible");
      next = final_solution.cost;
    }
    const double stage = r.u_applied.dot(config.R * r.u_applied) + r.y_true.dot(config.Q * r.y_true);
    const double margin = next - r.cost + stage;
    audit.margins.push_back(margin);
    audit.max_margin = std::max(audit.max_margin, margin);
  }
  if (audit.margins.empty()) audit.max_margin = 0.0;
  return audit;
}

Candidate candidate_construction(const RobustMpc& robust, const Sequence& data_states, const MpcSolution& nominal,
                                 const ExtendedState& noisy_init, const Eigen::VectorXd& x_start, double feas_tol) {
  if (!nominal.optimal()) throw PreconditionError("nominal solution is not optimal");
  const auto& layout = robust.layout();
  const auto& hu = robust.input_hankel();
  const int k_cols = layout.alpha_dim;
  if (static_cast<int>(data_states.size()) < k_cols) throw ShapeError("too few data states");
  const int nx = static_cast<int>(x_start.size());
  Eigen::MatrixXd hux(hu.rows() + nx, k_cols);
  hux.topRows(hu.rows()) = hu;
  for (int j = 0; j < k_cols; ++j) hux.block(hu.rows(), j, nx, 1) = data_states[j];
  const int rank = numerical_rank(hux);
  if (rank < hux.rows()) {
    throw DataQualityError("[H(u); H_1(x)] has rank " + std::to_string(rank) + " < " + std::to_string(hux.rows()) +
                           ": input is not persistently exciting enough");
  }
  Eigen::VectorXd rhs(hux.rows());
  rhs << stack(nominal.u_bar), x_start;

  Candidate c;
  c.alpha_hat = pseudoinverse(hux) * rhs;
  c.y_hat = stack(nominal.y_bar);
  c.y_hat.head(noisy_init.y_past.size()) = noisy_init.y_past;
  c.sigma_hat = robust.output_hankel() * c.alpha_hat - c.y_hat;
  c.cost = robust.evaluate(c.alpha_hat, c.y_hat);
  const auto assembled = robust.assemble(noisy_init);
  const Eigen::VectorXd z = robust.pack(c.alpha_hat, c.y_hat);
  c.violation = kkt_residuals(assembled.qp, z, Eigen::VectorXd::Zero(assembled.qp.num_equalities()),
                              Eigen::VectorXd::Zero(assembled.qp.num_inequalities()))
                    .primal;
  c.feasible = c.violation <= feas_tol;
  return c;
}

ExponentialFit fit_exponential(const std::vector<double>& values, double floor) {
  std::vector<double> ts;
  std::vector<double> logs;
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (values[t] > floor) {
      ts.push_back(static_cast<double>(t));
      logs.push_back(std::log(values[t]));
    }
  }
  if (ts.size() < 2) throw PreconditionError("exponential fit needs at least two samples above the floor");
  const Eigen::Index k = static_cast<Eigen::Index>(ts.size());
  Eigen::MatrixXd a(k, 2);
  Eigen::VectorXd b(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = ts[static_cast<std::size_t>(i)];
    b(i) = logs[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd res = b - a * coef;
  const double ss_tot = (b.array() - b.mean()).square().sum();
  ExponentialFit fit;
  fit.constant = std::exp(coef(0));
  fit.rho = std::exp(coef(1));
  fit.r_squared = ss_tot > 0.0 ? 1.0 - res.squaredNorm() / ss_tot : 1.0;
  fit.points = static_cast<int>(k);
  return fit;
}

bool monotone_nondecreasing(const std::vector<double>& values, double ripple) {
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i + 1] < (1.0 - ripple) * values[i]) return false;
  }
  return true;
}

namespace {

struct PointResult {
  std::vector<double> samples;  ///< metric of feasible runs
  int runs = 0;
  double kkt = 0.0;
};

void check_grid(const std::vector<double>& grid, int seeds) {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  if (seeds < 1) throw ConfigError("sweep needs at least one seed");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw ConfigError("sweep grid values must be nonnegative");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("sweep grid must be strictly increasing");
  }
}

template <class PointFn>
SweepReport run_sweep(const std::string& parameter, const std::string& metric, const std::vector<double>& grid,
                      int seeds, PointFn point) {
  check_grid(grid, seeds);
  std::vector<std::future<PointResult>> futures;
  for (double value : grid) futures.push_back(std::async(std::launch::async, point, value));
  SweepReport report;
  report.parameter = parameter;
  report.metric = metric;
  report.grid = grid;
  report.seeds = seeds;
  for (auto& f : futures) {
    const auto r = f.get();
    const auto count = static_cast<double>(r.samples.size());
    double mean = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    if (!r.samples.empty()) {
      mean = 0.0;
      for (double v : r.samples) mean += v;
      mean /= count;
      double var = 0.0;
      for (double v : r.samples) var += (v - mean) * (v - mean);
      sd = std::sqrt(var / count);
    }
    report.mean.push_back(mean);
    report.stddev.push_back(sd);
    report.feasibility.push_back(r.runs > 0 ? count / r.runs : 0.0);
    report.max_kkt_residual = std::max(report.max_kkt_residual, r.kkt);
  }
  std::vector<double> finite;
  for (double v : report.mean) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  report.monotone = monotone_nondecreasing(finite, report.ripple);
  if (grid.size() == 1) report.notes.push_back("single grid point: monotonicity holds trivially");
  return report;
}

}  // namespace

SweepReport continuity_sweep(const ExperimentSetup& setup, const std::vector<double>& eps_grid, int seeds) {
  const auto clean = generate_setup_data(setup, 0.0);
  const NominalMpc nominal(nominal_config(setup, clean.data));
  const auto window = initial_window(setup.plant, setup.x0, {}, setup.n);
  const auto reference = nominal.solve(window.xi);
  if (!reference.optimal()) {
    throw PreconditionError("nominal problem is infeasible at the initial window (" + to_string(reference.status) + ")");
  }
  const Eigen::VectorXd u_ref = stack(reference.u_bar);

  auto point = [&](double eps) {
    PointResult r;
    for (int s = 0; s < seeds; ++s) {
      ++r.runs;
      const auto noisy = generate_setup_data(setup, eps, static_cast<std::uint64_t>(s));
      const RobustMpc robust(robust_config(setup, noisy.data, eps));
      BoundedNoise online(NoiseSpec{eps, setup.distribution, stream_seed(setup.seed, Stream::OnlineNoise, s)},
                          setup.plant.p());
      const auto sol = robust.solve(perturb_outputs(window.xi, online));
      if (sol.optimal()) {
        r.samples.push_back((stack(sol.u_hat) - u_ref).norm());
        r.kkt = std::max(r.kkt, sol.qp.kkt.max());
      }
    }
    return r;
  };
  auto report = run_sweep("eps_bar", "input_deviation", eps_grid, seeds, point);
  report.max_kkt_residual = std::max(report.max_kkt_residual, reference.qp.kkt.max());
  report.verdict = report.monotone;
  report.notes.push_back("deviation between robust and nominal optimal inputs shrinks as eps_bar decreases");
  return report;
}

SweepReport excitation_sweep(const ExperimentSetup& setup, const std::vector<double>& amplitudes, double eps_bar,
                             int seeds) {
  if (!(eps_bar > 0.0)) throw ConfigError("excitation sweep needs eps_bar > 0");
  for (double a : amplitudes) {
    if (!(a > 0.0)) throw ConfigError("excitation amplitudes must be positive");
  }
  const auto window = initial_window(setup.plant, setup.x0, {}, setup.n);
  auto point = [&](double amplitude) {
    auto scaled = setup;
    scaled.data_amplitude = amplitude;
    PointResult r;
    const NominalMpc nominal(nominal_config(scaled, generate_setup_data(scaled, 0.0).data));
    const auto reference = nominal.solve(window.xi);
    if (!reference.optimal()) return r;
    for (int s = 0; s < seeds; ++s) {
      ++r.runs;
      const auto noisy = generate_setup_data(scaled, eps_bar, static_cast<std::uint64_t>(s));
      const RobustMpc robust(robust_config(scaled, noisy.data, eps_bar));
      BoundedNoise online(NoiseSpec{eps_bar, setup.distribution, stream_seed(setup.seed, Stream::OnlineNoise, s)},
                          setup.plant.p());
      const auto sol = robust.solve(perturb_outputs(window.xi, online));
      if (sol.optimal()) {
        r.samples.push_back((stack(sol.u_hat) - stack(reference.u_bar)).norm());
        r.kkt = std::max(r.kkt, sol.qp.kkt.max());
      }
    }
    return r;
  };
  auto report = run_sweep("amplitude", "input_deviation", amplitudes, seeds, point);
  report.verdict = true;
  report.notes.push_back("exploratory at eps_bar " + text::format_double(eps_bar) + ": no pass/fail bound");
  return report;
}

SweepReport practical_stability_sweep(const ExperimentSetup& setup, const std::vector<double>& eps_grid, int seeds,
                                      double floor) {
  auto point = [&](double eps) {
    PointResult r;
    for (int s = 0; s < seeds; ++s) {
      ++r.runs;
      const auto noisy = generate_setup_data(setup, eps, static_cast<std::uint64_t>(s));
      ClosedLoopConfig loop;
      loop.plant = setup.plant;
      loop.controller = robust_config(setup, noisy.data, eps);
      loop.schedule = Schedule::NStep;
      loop.T_sim = setup.T_sim;
      loop.x0 = setup.x0;
      loop.online_noise = NoiseSpec{eps, setup.distribution, stream_seed(setup.seed, Stream::OnlineNoise, s)};
      const auto trace = run_closed_loop(loop);
      r.kkt = std::max(r.kkt, trace.summary.max_kkt_residual);
      if (trace.summary.feasible_throughout) r.samples.push_back(trace.summary.limsup_xi_norm);
    }
    return r;
  };
  auto report = run_sweep("eps_bar", "limsup_xi_norm", eps_grid, seeds, point);
  const bool below_floor = std::isfinite(report.mean.front()) && report.mean.front() <= floor;
  report.verdict = report.monotone && below_floor;
  report.notes.push_back("smallest eps_bar limsup " + text::format_double(report.mean.front()) +
                         (below_floor ? " <= " : " > ") + "floor " + text::format_double(floor));
  return report;
}

SweepReport inherent_robustness_sweep(const ExperimentSetup& setup, const std::vector<double>& d_grid, int seeds,
                                      double feasible_below) {
  const auto clean = generate_setup_data(setup, 0.0);
  const auto config = nominal_config(setup, clean.data);
  auto point = [&](double d_bar) {
    PointResult r;
    for (int s = 0; s < seeds; ++s) {
      ++r.runs;
      ClosedLoopConfig loop;
      loop.plant = setup.plant;
      loop.controller = config;
      loop.schedule = Schedule::NStep;
      loop.T_sim = setup.T_sim;
      loop.x0 = setup.x0;
      loop.disturbance = DisturbanceSpec{d_bar, setup.distribution, stream_seed(setup.seed, Stream::Disturbance, s),
                                         std::nullopt};
      const auto trace = run_closed_loop(loop);
      r.kkt = std::max(r.kkt, trace.summary.max_kkt_residual);
      if (trace.summary.feasible_throughout) r.samples.push_back(trace.summary.limsup_xi_norm);
    }
    return r;
  };
  auto report = run_sweep("d_bar", "limsup_xi_norm", d_grid, seeds, point);
  bool feasible = true;
  for (std::size_t i = 0; i < d_grid.size(); ++i) {
    if (d_grid[i] <= feasible_below && report.feasibility[i] < 1.0) feasible = false;
  }
  report.verdict = report.monotone && feasible;
  report.notes.push_back(std::string("all runs with d_bar <= ") + text::format_double(feasible_below) +
                         (feasible ? " feasible" : " NOT all feasible"));
  return report;
}

DisturbanceThreshold disturbance_threshold(const ExperimentSetup& setup, double d_max, int seeds, int iterations) {
  if (!(d_max > 0.0)) throw ConfigError("disturbance threshold search needs d_max > 0");
  if (seeds < 1) throw ConfigError("threshold search needs at least one seed");
  const auto config = nominal_config(setup, generate_setup_data(setup, 0.0).data);
  DisturbanceThreshold result;
  auto all_feasible = [&](double d_bar) {
    ++result.evaluations;
    for (int s = 0; s < seeds; ++s) {
      ClosedLoopConfig loop;
      loop.plant = setup.plant;
      loop.controller = config;
      loop.schedule = Schedule::NStep;
      loop.T_sim = setup.T_sim;
      loop.x0 = setup.x0;
      loop.disturbance = DisturbanceSpec{d_bar, setup.distribution, stream_seed(setup.seed, Stream::Disturbance, s),
                                         std::nullopt};
      if (!run_closed_loop(loop).summary.feasible_throughout) return false;
    }
    return true;
  };
  if (all_feasible(d_max)) {
    result.feasible = d_max;
    return result;
  }
  double hi = d_max;
  double lo = d_max;
  while (lo > 1e-12 * d_max) {
    lo *= 1e-2;
    if (all_feasible(lo)) break;
    hi = lo;
  }
  if (!all_feasible(lo)) {
    result.infeasible = lo;
    return result;
  }
  for (int i = 0; i < iterations && hi / lo > 1.0 + 1e-6; ++i) {
    const double mid = std::sqrt(lo * hi);
    (all_feasible(mid) ? lo : hi) = mid;
  }
  result.feasible = lo;
  result.infeasible = hi;
  return result;
}

double nominal_baseline_limsup(const ExperimentSetup& setup) {
  const auto clean = generate_setup_data(setup, 0.0);
  ClosedLoopConfig loop;
  loop.plant = setup.plant;
  loop.controller = nominal_config(setup, clean.data);
  loop.schedule = Schedule::NStep;
  loop.T_sim = setup.T_sim;
  loop.x0 = setup.x0;
  const auto trace = run_closed_loop(loop);
  if (!trace.summary.feasible_throughout) throw PreconditionError("nominal baseline run is infeasible");
  return trace.summary.limsup_xi_norm;
}

void write_report_csv(std::ostream& out, const SweepReport& report) {
  std::ostringstream s;
  s << "grid_value,metric_mean,metric_std,feasibility_rate\n";
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    s << text::format_double(report.grid[i]) << ',' << text::format_double(report.mean[i]) << ','
      << text::format_double(report.stddev[i]) << ',' << text::format_double(report.feasibility[i]) << '\n';
  }
  out << s.str();
}

void write_report_csv(const std::filesystem::path& path, const SweepReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_report_csv(out, report);
}

std::string format_verdict(const SweepReport& report) {
  std::ostringstream s;
  s << "parameter = " << report.parameter << '\n'
    << "metric = " << report.metric << '\n'
    << "points = " << report.grid.size() << '\n'
    << "seeds = " << report.seeds << '\n'
    << "ripple = " << text::format_double(report.ripple) << '\n'
    << "monotone = " << (report.monotone ? "true" : "false") << '\n'
    << "verdict = " << (report.verdict ? "pass" : "fail") << '\n'
    << "max_kkt_residual = " << text::format_double(report.max_kkt_residual) << '\n';
  for (const auto& note : report.notes) s << "note = " << note << '\n';
  return s.str();
}

}  // namespace ddmpc
