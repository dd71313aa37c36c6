#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "ddmpc/analysis.hpp"
#include "ddmpc/config.hpp"
#include "ddmpc/errors.hpp"
#include "ddmpc/text.hpp"

namespace fs = std::filesystem;

namespace ddmpc::cli {

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string candidate_path;
};

fs::path resolve(const KeyValueConfig& cfg, const std::string& file) {
  const fs::path p(file);
  return p.is_absolute() ? p : cfg.base_dir() / p;
}

StateSpaceModel load_plant(const KeyValueConfig& cfg) {
  if (cfg.has("plant.file")) return read_model(resolve(cfg, cfg.get("plant.file")));
  if (cfg.has("plant.preset")) {
    const auto& name = cfg.get("plant.preset");
    if (name == "scalar") return scalar_test_plant();
    if (name == "double-integrator") return double_integrator_plant();
    throw ConfigError("unknown plant.preset '" + name + "' (use scalar or double-integrator)");
  }
  throw ConfigError("missing key 'plant.file'");
}

/// Box from `<prefix>_min`/`<prefix>_max`, or polytope from `G_<prefix>`/`h_<prefix>`.
std::optional<Polytope> load_set(const KeyValueConfig& c, const std::string& prefix, int dim) {
  if (c.has(prefix + "_min") || c.has(prefix + "_max")) {
    return Polytope::box(c.get_vector(prefix + "_min", dim), c.get_vector(prefix + "_max", dim));
  }
  if (c.has("G_" + prefix)) {
    const auto h = c.get_list("h_" + prefix);
    return Polytope{c.get_matrix("G_" + prefix, static_cast<Eigen::Index>(h.size()), dim),
                    Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()))};
  }
  return std::nullopt;
}

ExperimentSetup load_setup(const KeyValueConfig& cfg, const GlobalOptions& opts) {
  ExperimentSetup s;
  s.plant = load_plant(cfg);
  const int m = s.plant.m(), p = s.plant.p(), nx = s.plant.n();
  const auto c = cfg.section("controller");
  s.L = static_cast<int>(c.get_int("L"));
  s.n = static_cast<int>(c.get_int("n"));
  s.Q = c.has("Q") ? c.get_matrix("Q", p, p) : Eigen::MatrixXd::Identity(p, p);
  s.R = c.has("R") ? c.get_matrix("R", m, m) : Eigen::MatrixXd::Identity(m, m);
  s.input_set = load_set(c, "u", m).value_or(Polytope::whole_space(m));
  s.output_set = load_set(c, "y", p).value_or(Polytope::whole_space(p));
  s.lambda_alpha = c.get_double_or("lambda_alpha", s.lambda_alpha);
  s.lambda_sigma = c.get_double_or("lambda_sigma", s.lambda_sigma);
  s.beta_alpha = c.get_double_or("beta_alpha", s.beta_alpha);
  s.beta_sigma = c.get_double_or("beta_sigma", s.beta_sigma);

  const auto d = cfg.section("data");
  s.data_length = static_cast<int>(d.get_int_or("N", 0));
  s.data_x0 = d.has("x0") ? d.get_vector("x0", nx) : Eigen::VectorXd::Zero(nx);
  s.data_amplitude = d.get_double_or("amplitude", 1.0);
  s.distribution = parse_noise_distribution(cfg.get_or("noise.distribution", "uniform-ball"));

  const auto l = cfg.section("loop");
  s.x0 = l.has("x0") ? l.get_vector("x0", nx) : Eigen::VectorXd::Zero(nx);
  s.T_sim = static_cast<int>(l.get_int_or("T_sim", 50));
  s.schedule = parse_schedule(l.get_or("schedule", "one-step"));
  const long long seed = cfg.get_int_or("seed", 1);
  if (seed < 0) throw ConfigError("seed must be nonnegative");
  s.seed = opts.seed.value_or(static_cast<std::uint64_t>(seed));
  return s;
}

std::string controller_type(const KeyValueConfig& cfg) {
  const auto type = cfg.get_or("controller.type", "nominal");
  if (type != "nominal" && type != "robust") {
    throw ConfigError("unknown controller.type '" + type + "' (use nominal or robust)");
  }
  return type;
}

fs::path prepare_out(const GlobalOptions& opts) {
  const fs::path dir(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << content;
}

int cmd_generate_data(const KeyValueConfig& cfg, const GlobalOptions& opts, std::ostream& out) {
  const auto setup = load_setup(cfg, opts);
  if (setup.data_length <= 0) throw ConfigError("missing or invalid key 'data.N'");
  const double eps = cfg.get_double_or("data.eps_bar", 0.0);
  const auto generated = generate_setup_data(setup, eps);
  const int order = setup.L + 2 * setup.n;
  const auto pe = is_persistently_exciting(generated.data.inputs(), order);

  const auto dir = prepare_out(opts);
  write_trajectory_csv(dir / "data.csv", generated.data);
  std::ostringstream report;
  report << "samples = " << generated.data.size() << '\n'
         << "eps_bar = " << text::format_double(eps) << '\n'
         << "required_order = " << order << '\n'
         << "rank = " << pe.rank << '\n'
         << "required_rank = " << pe.required_rank << '\n'
         << "min_singular_value = " << text::format_double(pe.min_singular_value) << '\n'
         << "persistently_exciting = " << (pe.exciting ? "true" : "false") << '\n';
  write_text(dir / "pe_report.txt", report.str());
  out << report.str();
  return pe.exciting ? kOk : kCheckFailed;
}

int cmd_run(const KeyValueConfig& cfg, const GlobalOptions& opts, std::ostream& out) {
  const auto setup = load_setup(cfg, opts);
  const auto type = controller_type(cfg);
  const auto data = read_trajectory_csv(resolve(cfg, cfg.get("data.file")));

  ClosedLoopConfig loop;
  loop.plant = setup.plant;
  loop.schedule = setup.schedule;
  loop.T_sim = setup.T_sim;
  loop.x0 = setup.x0;
  double noise_bound = 0.0;
  if (type == "robust") {
    if (!cfg.has("controller.eps_bar")) throw ConfigError("robust controller requires 'controller.eps_bar'");
    const double eps = cfg.get_double("controller.eps_bar");
    loop.controller = robust_config(setup, data, eps);
    noise_bound = eps;
  } else {
    loop.controller = nominal_config(setup, data);
  }
  noise_bound = cfg.get_double_or("loop.noise_bound", noise_bound);
  loop.online_noise = NoiseSpec{noise_bound, setup.distribution, stream_seed(setup.seed, Stream::OnlineNoise)};
  const double d_bar = cfg.get_double_or("loop.d_bar", 0.0);
  if (d_bar > 0.0) {
    loop.disturbance =
        DisturbanceSpec{d_bar, setup.distribution, stream_seed(setup.seed, Stream::Disturbance), std::nullopt};
  }

  const auto trace = run_closed_loop(loop);
  const auto dir = prepare_out(opts);
  write_trace_csv(dir / "trace.csv", trace);
  const auto summary = format_summary(trace.summary);
  write_text(dir / "summary.txt", summary);
  out << summary;
  return trace.summary.feasible_throughout ? kOk : kInfeasible;
}

std::vector<double> load_grid(const KeyValueConfig& cfg) {
  if (!cfg.has("sweep.grid")) throw ConfigError("missing key 'sweep.grid'");
  return cfg.get_list("sweep.grid");
}

int cmd_sweep(const KeyValueConfig& cfg, const GlobalOptions& opts, std::ostream& out) {
  const auto setup = load_setup(cfg, opts);
  if (setup.data_length <= 0) throw ConfigError("missing or invalid key 'data.N'");
  const auto parameter = cfg.get("sweep.parameter");
  const auto seeds = static_cast<int>(cfg.get_int_or("sweep.seeds", 10));
  SweepReport report;
  if (parameter == "eps_bar") {
    const auto metric = cfg.get_or("sweep.metric", "input_deviation");
    if (metric == "input_deviation") {
      report = continuity_sweep(setup, load_grid(cfg), seeds);
    } else if (metric == "limsup_xi_norm") {
      report = practical_stability_sweep(setup, load_grid(cfg), seeds, cfg.get_double_or("sweep.floor", 1e-2));
    } else {
      throw ConfigError("unknown sweep.metric '" + metric + "' for eps_bar (use input_deviation or limsup_xi_norm)");
    }
  } else if (parameter == "d_bar") {
    report = inherent_robustness_sweep(setup, load_grid(cfg), seeds, cfg.get_double_or("sweep.feasible_below", 1e-3));
  } else if (parameter == "amplitude") {
    if (!cfg.has("sweep.eps_bar")) throw ConfigError("amplitude sweep requires 'sweep.eps_bar'");
    report = excitation_sweep(setup, load_grid(cfg), cfg.get_double("sweep.eps_bar"), seeds);
  } else {
    throw ConfigError("unknown sweep.parameter '" + parameter + "' (use eps_bar, d_bar or amplitude)");
  }

  auto verdict = format_verdict(report);
  if (parameter == "d_bar" && cfg.has("sweep.threshold_max")) {
    const auto threshold = disturbance_threshold(setup, cfg.get_double("sweep.threshold_max"), seeds);
    std::ostringstream s;
    s << std::setprecision(17) << "threshold_feasible = " << threshold.feasible
      << "\nthreshold_infeasible = " << threshold.infeasible << "\n";
    verdict += s.str();
  }

  const auto dir = prepare_out(opts);
  write_report_csv(dir / "report.csv", report);
  write_text(dir / "verdict.txt", verdict);
  out << verdict;
  return report.verdict ? kOk : kCheckFailed;
}

int cmd_verify_lemma(const KeyValueConfig& cfg, const GlobalOptions& opts, std::ostream& out) {
  const auto data = read_trajectory_csv(resolve(cfg, cfg.get("data.file")));
  std::string candidate_file = opts.candidate_path;
  if (candidate_file.empty()) candidate_file = cfg.get("verify.candidate");
  const auto candidate = read_trajectory_csv(resolve(cfg, candidate_file));
  std::optional<int> order;
  if (cfg.has("controller.n")) order = static_cast<int>(cfg.get_int("controller.n"));
  const double tol = cfg.get_double_or("verify.tol", 1e-8);

  const auto result = membership_residual(data, candidate, order);
  std::ostringstream report;
  report << "residual = " << text::format_double(result.residual) << '\n'
         << "tolerance = " << text::format_double(tol) << '\n'
         << "excitation_sufficient = " << (result.excitation_sufficient ? "true" : "false") << '\n'
         << "member = " << (result.residual <= tol ? "true" : "false") << '\n';
  write_text(prepare_out(opts) / "lemma_report.txt", report.str());
  out << report.str();
  return result.residual <= tol ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-driven predictive control experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "Experiment configuration (dotted key = value)")->required();
  app.add_option("--seed", opts.seed, "Root seed, overrides the 'seed' key");
  app.add_option("--out", opts.out_dir, "Output directory");
  auto* generate = app.add_subcommand("generate-data", "Simulate a data record and check its excitation");
  auto* run_cmd = app.add_subcommand("run", "Closed-loop simulation");
  auto* sweep = app.add_subcommand("sweep", "Noise or disturbance sweep with a verdict");
  auto* verify = app.add_subcommand("verify-lemma", "Membership residual of a candidate trajectory");
  verify->add_option("--candidate", opts.candidate_path, "Candidate trajectory CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    const auto cfg = KeyValueConfig::load(opts.config_path);
    if (generate->parsed()) return cmd_generate_data(cfg, opts, out);
    if (run_cmd->parsed()) return cmd_run(cfg, opts, out);
    if (sweep->parsed()) return cmd_sweep(cfg, opts, out);
    return cmd_verify_lemma(cfg, opts, out);
  } catch (const DataQualityError& e) {
    err << "data quality error: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace ddmpc::cli
