#include "ddmpc/loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ddmpc/errors.hpp"
#include "ddmpc/text.hpp"

namespace ddmpc {

Schedule parse_schedule(const std::string& name) {
  if (name == "one-step") return Schedule::OneStep;
  if (name == "n-step") return Schedule::NStep;
  throw ConfigError("unknown schedule '" + name + "' (expected one-step or n-step)");
}

std::string to_string(Schedule s) { return s == Schedule::OneStep ? "one-step" : "n-step"; }

Eigen::VectorXd inject_disturbance(const Eigen::VectorXd& u_opt, const Eigen::VectorXd& d, double bound) {
  if (d.size() != u_opt.size()) throw ShapeError("disturbance dimension differs from the input dimension");
  if (d.norm() > bound) {
    throw ValidationError("disturbance norm " + text::format_double(d.norm()) + " exceeds the bound " +
                          text::format_double(bound));
  }
  return u_opt + d;
}

int ClosedLoopConfig::state_order() const {
  return std::visit(
      [](const auto& c) {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, NominalMpcConfig>) {
          return c.n;
        } else {
          return c.base.n;
        }
      },
      controller);
}

double tail_max(const std::vector<double>& values, double fraction) {
  if (values.empty()) return 0.0;
  const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * values.size())));
  return *std::max_element(values.end() - static_cast<std::ptrdiff_t>(std::min(count, values.size())), values.end());
}

namespace {

struct Plan {
  QpStatus status = QpStatus::Infeasible;
  double cost = 0.0;
  double kkt = 0.0;
  Sequence inputs;  ///< optimal inputs from k = 0
};

/// Type-erased access to either controller.
class Controller {
 public:
  explicit Controller(const std::variant<NominalMpcConfig, RobustMpcConfig>& config) {
    if (const auto* nominal = std::get_if<NominalMpcConfig>(&config)) {
      nominal_ = std::make_unique<NominalMpc>(*nominal);
    } else {
      robust_ = std::make_unique<RobustMpc>(std::get<RobustMpcConfig>(config));
    }
  }

  Plan solve(const ExtendedState& xi, int count) const {
    Plan plan;
    const int n = xi.n;
    if (nominal_) {
      const auto sol = nominal_->solve(xi);
      plan.status = sol.status;
      plan.cost = sol.cost;
      plan.kkt = sol.qp.kkt.max();
      if (sol.optimal()) {
        for (int k = 0; k < count; ++k) plan.inputs.push_back(sol.input(k, n));
      }
    } else {
      const auto sol = robust_->solve(xi);
      plan.status = sol.status;
      plan.cost = sol.cost;
      plan.kkt = sol.qp.kkt.max();
      if (sol.optimal()) {
        for (int k = 0; k < count; ++k) plan.inputs.push_back(sol.input(k, n));
      }
    }
    return plan;
  }

 private:
  std::unique_ptr<NominalMpc> nominal_;
  std::unique_ptr<RobustMpc> robust_;
};

Sequence last(const Sequence& seq, int count) { return Sequence(seq.end() - count, seq.end()); }

}  // namespace

ClosedLoopTrace run_closed_loop(const ClosedLoopConfig& config) {
  const auto& plant = config.plant;
  const int n = config.state_order();
  const int m = plant.m();
  const int p = plant.p();
  if (config.T_sim < n) throw ConfigError("T_sim must be at least n");
  if (config.x0.size() != plant.n()) throw ShapeError("initial state has the wrong dimension");
  if (!config.warmup.empty() && static_cast<int>(config.warmup.size()) != n) {
    throw ConfigError("warm-up must contain exactly n inputs");
  }

  const Controller controller(config.controller);
  BoundedNoise online(config.online_noise, p);
  std::optional<BoundedNoise> dist_stream;
  double dist_bound = 0.0;
  const Sequence* dist_samples = nullptr;
  if (config.disturbance) {
    dist_bound = config.disturbance->bound;
    if (dist_bound < 0.0) throw ConfigError("disturbance bound must be nonnegative");
    if (config.disturbance->sequence) {
      dist_samples = &*config.disturbance->sequence;
      if (static_cast<int>(dist_samples->size()) < config.T_sim) {
        throw ConfigError("disturbance sequence is shorter than T_sim");
      }
    } else {
      dist_stream.emplace(NoiseSpec{dist_bound, config.disturbance->distribution, config.disturbance->seed}, m);
    }
  }

  ClosedLoopTrace trace;
  trace.m = m;
  trace.p = p;
  trace.n = n;

  Eigen::VectorXd x = config.x0;
  Sequence u_hist;
  Sequence y_meas_hist;
  Sequence y_true_hist;
  auto advance = [&](const Eigen::VectorXd& u, Eigen::VectorXd& y_true, Eigen::VectorXd& y_meas) {
    y_true = plant.C * x + plant.D * u;
    y_meas = y_true + online.next();
    x = plant.A * x + plant.B * u;
    u_hist.push_back(u);
    y_true_hist.push_back(y_true);
    y_meas_hist.push_back(y_meas);
  };

  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd u = config.warmup.empty() ? Eigen::VectorXd::Zero(m) : config.warmup[k];
    Eigen::VectorXd y_true, y_meas;
    advance(u, y_true, y_meas);
  }

  std::vector<double> norms;
  Plan plan;
  int plan_start = 0;
  const int block = config.schedule == Schedule::NStep ? n : 1;
  for (int t = 0; t < config.T_sim; ++t) {
    StepRecord rec;
    rec.t = t;
    const auto xi = extended_state(last(u_hist, n), last(y_meas_hist, n), n);
    rec.xi = xi.stacked();
    rec.xi_norm = extended_state(last(u_hist, n), last(y_true_hist, n), n).norm();
    norms.push_back(rec.xi_norm);

    if (t % block == 0) {
      const auto start = std::chrono::steady_clock::now();
      plan = controller.solve(xi, block);
      rec.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      plan_start = t;
      rec.solved = true;
      rec.status = plan.status;
      rec.cost = plan.cost;
      ++trace.summary.solves;
      if (plan.status != QpStatus::Optimal) {
        rec.cost = std::numeric_limits<double>::quiet_NaN();
        trace.summary.feasible_throughout = false;
        trace.summary.failing_step = t;
        trace.records.push_back(std::move(rec));
        break;
      }
      rec.kkt_residual = plan.kkt;
      trace.summary.max_kkt_residual = std::max(trace.summary.max_kkt_residual, plan.kkt);
    } else {
      rec.cost = std::numeric_limits<double>::quiet_NaN();
    }

    rec.u_opt = plan.inputs[static_cast<std::size_t>(t - plan_start)];
    if (dist_samples) {
      rec.u_applied = inject_disturbance(rec.u_opt, (*dist_samples)[t], dist_bound);
    } else if (dist_stream) {
      rec.u_applied = inject_disturbance(rec.u_opt, dist_stream->next(), dist_bound);
    } else {
      rec.u_applied = rec.u_opt;
    }
    advance(rec.u_applied, rec.y_true, rec.y_meas);
    trace.records.push_back(std::move(rec));
  }

  trace.summary.steps = static_cast<int>(trace.records.size());
  trace.final_xi = extended_state(last(u_hist, n), last(y_true_hist, n), n).stacked();
  if (trace.summary.feasible_throughout) norms.push_back(trace.final_xi.norm());
  trace.summary.final_xi_norm = trace.final_xi.norm();
  trace.summary.limsup_xi_norm = tail_max(norms);
  return trace;
}

namespace {

void append_columns(std::ostringstream& out, const std::string& name, int dim) {
  for (int i = 0; i < dim; ++i) out << ',' << name << '_' << i;
}

void append_values(std::ostringstream& out, const Eigen::VectorXd& v, int dim) {
  for (int i = 0; i < dim; ++i) out << ',' << (v.size() == dim ? text::format_double(v(i)) : std::string("nan"));
}

}  // namespace

void write_trace_csv(std::ostream& out, const ClosedLoopTrace& trace) {
  std::ostringstream s;
  s << 't';
  append_columns(s, "u*", trace.m);
  append_columns(s, "u_applied", trace.m);
  append_columns(s, "y_true", trace.p);
  append_columns(s, "y_meas", trace.p);
  s << ",cost,status,xi_norm\n";
  for (const auto& r : trace.records) {
    s << r.t;
    append_values(s, r.u_opt, trace.m);
    append_values(s, r.u_applied, trace.m);
    append_values(s, r.y_true, trace.p);
    append_values(s, r.y_meas, trace.p);
    s << ',' << text::format_double(r.cost) << ',' << (r.solved ? to_string(r.status) : std::string("held")) << ','
      << text::format_double(r.xi_norm) << '\n';
  }
  out << s.str();
}

void write_trace_csv(const std::filesystem::path& path, const ClosedLoopTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_trace_csv(out, trace);
}

std::string format_summary(const ClosedLoopSummary& summary) {
  std::ostringstream s;
  s << "feasible_throughout = " << (summary.feasible_throughout ? "true" : "false") << '\n'
    << "failing_step = " << summary.failing_step << '\n'
    << "steps = " << summary.steps << '\n'
    << "solves = " << summary.solves << '\n'
    << "final_xi_norm = " << text::format_double(summary.final_xi_norm) << '\n'
    << "limsup_xi_norm = " << text::format_double(summary.limsup_xi_norm) << '\n'
    << "max_kkt_residual = " << text::format_double(summary.max_kkt_residual) << '\n';
  return s.str();
}

}  // namespace ddmpc
