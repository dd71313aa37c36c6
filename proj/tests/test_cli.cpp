#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "ddmpc/analysis.hpp"
#include "ddmpc/config.hpp"

namespace fs = std::filesystem;
using namespace ddmpc;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("ddmpc_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write("scalar.plant", "n = 1\nm = 1\np = 1\nA = 0.5\nB = 1\nC = 1\nD = 0\n");
    write("di.plant", "n = 2\nm = 1\np = 1\nA = 1, 1, 0, 1\nB = 0, 1\nC = 1, 0\n");
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const std::string& name, const std::string& content) { std::ofstream(dir_ / name) << content; }
  std::string read(const fs::path& path) const {
    std::ifstream f(path);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  }

  int cli(const std::string& config, std::vector<std::string> args, const std::string& out = "out") {
    stdout_.str("");
    stderr_.str("");
    args.insert(args.begin(), {"--config", (dir_ / config).string(), "--out", (dir_ / out).string()});
    return cli::run(args, stdout_, stderr_);
  }

  static std::string scalar_config(const std::string& extra = "") {
    return "plant.file = scalar.plant\ncontroller.L = 8\ncontroller.n = 1\ncontroller.u_min = -5\n"
           "controller.u_max = 5\ndata.N = 60\ndata.file = out/data.csv\nloop.x0 = 1\nloop.T_sim = 50\n" +
           extra;
  }

  fs::path dir_;
  std::ostringstream stdout_, stderr_;
};

}  // namespace

TEST_F(CliTest, GenerateDataVerifiesExcitationOrder) {
  write("c.cfg", scalar_config());
  EXPECT_EQ(cli("c.cfg", {"generate-data"}), cli::kOk);
  const auto report = read(dir_ / "out" / "pe_report.txt");
  EXPECT_NE(report.find("required_order = 10\n"), std::string::npos);
  EXPECT_NE(report.find("persistently_exciting = true\n"), std::string::npos);
  const auto data = read_trajectory_csv(dir_ / "out" / "data.csv");
  EXPECT_EQ(data.size(), 60);
  ASSERT_TRUE(data.clean_outputs().has_value());
  EXPECT_TRUE(data.outputs() == *data.clean_outputs());
}

TEST_F(CliTest, GenerateDataReportsMissingExcitation) {
  write("c.cfg", scalar_config("controller.L = 30\n"));
  EXPECT_EQ(cli("c.cfg", {"generate-data"}), cli::kCheckFailed);
  EXPECT_NE(read(dir_ / "out" / "pe_report.txt").find("persistently_exciting = false"), std::string::npos);
}

TEST_F(CliTest, MissingPlantFileIsConfigError) {
  write("c.cfg", scalar_config("plant.file = nowhere.plant\n"));
  EXPECT_EQ(cli("c.cfg", {"generate-data"}), cli::kConfigError);
  EXPECT_NE(stderr_.str().find("nowhere.plant"), std::string::npos);
}

TEST_F(CliTest, NominalRunConverges) {
  write("c.cfg", scalar_config());
  ASSERT_EQ(cli("c.cfg", {"generate-data"}), cli::kOk);
  EXPECT_EQ(cli("c.cfg", {"run"}), cli::kOk);
  const auto summary = KeyValueConfig::parse(read(dir_ / "out" / "summary.txt"));
  EXPECT_EQ(summary.get("feasible_throughout"), "true");
  EXPECT_LE(summary.get_double("final_xi_norm"), 1e-6);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "trace.csv"));
}

TEST_F(CliTest, EquilibriumRunIsAllZero) {
  write("c.cfg", scalar_config("loop.x0 = 0\nloop.T_sim = 5\n"));
  ASSERT_EQ(cli("c.cfg", {"generate-data"}), cli::kOk);
  ASSERT_EQ(cli("c.cfg", {"run"}), cli::kOk);
  std::istringstream trace(read(dir_ / "out" / "trace.csv"));
  std::string line;
  std::getline(trace, line);
  int rows = 0;
  while (std::getline(trace, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.find(',')), ",0,0,0,0,0,optimal,0") << line;
  }
  EXPECT_EQ(rows, 5);
}

TEST_F(CliTest, RobustRunWithoutNoiseBoundIsConfigError) {
  write("c.cfg", scalar_config("controller.type = robust\n"));
  ASSERT_EQ(cli("c.cfg", {"generate-data"}), cli::kOk);
  EXPECT_EQ(cli("c.cfg", {"run"}), cli::kConfigError);
  EXPECT_NE(stderr_.str().find("eps_bar"), std::string::npos);
}

TEST_F(CliTest, InfeasibleRunExitsWithCode3) {
  write("c.cfg",
        "plant.file = di.plant\ncontroller.L = 10\ncontroller.n = 2\ncontroller.u_min = -1\ncontroller.u_max = 1\n"
        "data.N = 40\ndata.file = out/data.csv\nloop.x0 = 100, 0\nloop.T_sim = 10\n");
  ASSERT_EQ(cli("c.cfg", {"generate-data"}), cli::kOk);
  EXPECT_EQ(cli("c.cfg", {"run"}), cli::kInfeasible);
  EXPECT_NE(read(dir_ / "out" / "summary.txt").find("failing_step = 0\n"), std::string::npos);
}

TEST_F(CliTest, RunsAreDeterministicAndSeedOverrides) {
  write("c.cfg", scalar_config("controller.type = robust\ncontroller.eps_bar = 1e-2\ndata.eps_bar = 1e-2\n"));
  ASSERT_EQ(cli("c.cfg", {"generate-data"}), cli::kOk);
  ASSERT_EQ(cli("c.cfg", {"run"}, "a"), cli::kOk);
  ASSERT_EQ(cli("c.cfg", {"run"}, "b"), cli::kOk);
  ASSERT_EQ(cli("c.cfg", {"--seed", "5", "run"}, "c"), cli::kOk);
  EXPECT_EQ(read(dir_ / "a" / "trace.csv"), read(dir_ / "b" / "trace.csv"));
  EXPECT_NE(read(dir_ / "a" / "trace.csv"), read(dir_ / "c" / "trace.csv"));
}

TEST_F(CliTest, SweepDispatchesOnParameterAndMetric) {
  write("cont.cfg", scalar_config("sweep.parameter = eps_bar\nsweep.grid = 1e-4, 1e-3\nsweep.seeds = 2\n"));
  EXPECT_EQ(cli("cont.cfg", {"sweep"}), cli::kOk);
  EXPECT_NE(stdout_.str().find("metric = input_deviation\n"), std::string::npos);

  write("ps.cfg", scalar_config("sweep.parameter = eps_bar\nsweep.metric = limsup_xi_norm\nsweep.grid = 1e-4, 1e-3\n"
                                "sweep.seeds = 2\n"));
  EXPECT_EQ(cli("ps.cfg", {"sweep"}), cli::kOk);
  EXPECT_NE(stdout_.str().find("metric = limsup_xi_norm\n"), std::string::npos);
  EXPECT_NE(stdout_.str().find("parameter = eps_bar\n"), std::string::npos);

  write("d.cfg", scalar_config("sweep.parameter = d_bar\nsweep.grid = 1e-4, 1e-3\nsweep.seeds = 2\n"));
  EXPECT_EQ(cli("d.cfg", {"sweep"}), cli::kOk);
  EXPECT_NE(stdout_.str().find("parameter = d_bar\n"), std::string::npos);
  std::istringstream csv(read(dir_ / "out" / "report.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "grid_value,metric_mean,metric_std,feasibility_rate");
}

TEST_F(CliTest, DisturbanceSweepReportsThreshold) {
  write("c.cfg",
        "plant.file = di.plant\ncontroller.L = 10\ncontroller.n = 2\ncontroller.u_min = -1\ncontroller.u_max = 1\n"
        "data.N = 40\nloop.x0 = 1, 0\nloop.T_sim = 50\nsweep.parameter = d_bar\nsweep.grid = 1e-3\n"
        "sweep.seeds = 2\nsweep.threshold_max = 10\n");
  EXPECT_EQ(cli("c.cfg", {"sweep"}), cli::kOk);
  const auto verdict = KeyValueConfig::parse(read(dir_ / "out" / "verdict.txt"));
  EXPECT_GT(verdict.get_double("threshold_feasible"), 1e-3);
  EXPECT_LT(verdict.get_double("threshold_feasible"), verdict.get_double("threshold_infeasible"));
}

TEST_F(CliTest, SinglePointSweepPasses) {
  write("c.cfg", scalar_config("sweep.parameter = eps_bar\nsweep.grid = 1e-3\nsweep.seeds = 1\n"));
  EXPECT_EQ(cli("c.cfg", {"sweep"}), cli::kOk);
  EXPECT_NE(stdout_.str().find("verdict = pass\n"), std::string::npos);
}

TEST_F(CliTest, SweepErrors) {
  write("p.cfg", scalar_config("sweep.parameter = lambda\nsweep.grid = 1\n"));
  EXPECT_EQ(cli("p.cfg", {"sweep"}), cli::kConfigError);
  write("g.cfg", scalar_config("sweep.parameter = eps_bar\nsweep.grid = 1e-2, 1e-3\n"));
  EXPECT_EQ(cli("g.cfg", {"sweep"}), cli::kConfigError);
}

TEST_F(CliTest, VerifyLemmaSeparatesMembersFromOutsiders) {
  write("c.cfg", scalar_config("verify.candidate = cand.csv\n"));
  ASSERT_EQ(cli("c.cfg", {"generate-data"}), cli::kOk);
  const Sequence u{Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Constant(1, -1.0),
                   Eigen::VectorXd::Constant(1, 0.5)};
  const auto member = simulate(scalar_test_plant(), Eigen::VectorXd::Constant(1, 2.0), u);
  write_trajectory_csv(dir_ / "cand.csv", TrajectoryData(u, member.outputs));
  EXPECT_EQ(cli("c.cfg", {"verify-lemma"}), cli::kOk);
  EXPECT_NE(stdout_.str().find("member = true"), std::string::npos);

  Sequence wrong = member.outputs;
  wrong[2](0) += 0.5;
  write_trajectory_csv(dir_ / "other.csv", TrajectoryData(u, wrong));
  EXPECT_EQ(cli("c.cfg", {"verify-lemma", "--candidate", (dir_ / "other.csv").string()}), cli::kCheckFailed);
  EXPECT_NE(stdout_.str().find("member = false"), std::string::npos);
}

TEST_F(CliTest, CommandLineErrors) {
  write("c.cfg", scalar_config());
  EXPECT_EQ(cli("c.cfg", {}), cli::kConfigError);
  EXPECT_EQ(cli("c.cfg", {"bogus"}), cli::kConfigError);
  std::ostringstream out, err;
  EXPECT_EQ(cli::run({"run"}, out, err), cli::kConfigError);
  EXPECT_EQ(cli("missing.cfg", {"run"}), cli::kConfigError);
  EXPECT_NE(stderr_.str().find("missing.cfg"), std::string::npos);
}
