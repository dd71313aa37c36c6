#include "ddmpc/qp.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ddmpc/errors.hpp"
#include "ddmpc/linalg.hpp"
#include "oracles.hpp"

using namespace ddmpc;

namespace {

QuadraticProgram from_random(const oracles::RandomQp& r) {
  QuadraticProgram qp;
  qp.P = r.p;
  qp.q = r.q;
  qp.A_eq = r.a_eq;
  qp.b_eq = r.b_eq;
  qp.G = r.g;
  qp.h = r.h;
  return qp;
}

}  // namespace

TEST(QpSolve, ProjectionOntoHyperplane) {
  auto qp = QuadraticProgram::with_variables(2);
  qp.P = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  qp.A_eq = Eigen::RowVector2d(1.0, 0.0);
  qp.b_eq = Eigen::VectorXd::Constant(1, 1.0);
  const auto sol = solve(qp);
  ASSERT_TRUE(sol.optimal()) << sol.message;
  EXPECT_NEAR(sol.z(0), 1.0, 1e-12);
  EXPECT_NEAR(sol.z(1), 0.0, 1e-12);
  EXPECT_NEAR(sol.objective, 1.0, 1e-12);
}

TEST(QpSolve, ActiveUpperBoundHasDualTwo) {
  // (z - 2)^2 = z^2 - 4z + 4, i.e. P = 2, q = -4.
  auto qp = QuadraticProgram::with_variables(1);
  qp.P(0, 0) = 2.0;
  qp.q(0) = -4.0;
  qp.G = Eigen::MatrixXd::Constant(1, 1, 1.0);
  qp.h = Eigen::VectorXd::Constant(1, 1.0);
  const auto sol = solve(qp);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.z(0), 1.0, 1e-12);
  EXPECT_NEAR(sol.duals_ineq(0), 2.0, 1e-12);
  ASSERT_EQ(sol.active_set, std::vector<int>{0});
}

TEST(QpSolve, MatchesEnumerationOracleOnRandomFiveVariableProblem) {
  std::mt19937_64 rng(7);
  const auto r = oracles::random_qp(rng, 5, 2, 4);
  const auto oracle = oracles::enumerate_active_sets(r.p, r.q, r.a_eq, r.b_eq, r.g, r.h);
  ASSERT_TRUE(oracle.feasible);
  const auto sol = solve(from_random(r));
  ASSERT_TRUE(sol.optimal()) << sol.message;
  EXPECT_LE((sol.z - oracle.z).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(QpSolve, OracleEquivalenceOnManyRandomProblems) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(2, 7);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int n = dim(rng);
    const int me = std::uniform_int_distribution<int>(0, std::min(2, n - 1))(rng);
    const int mi = std::uniform_int_distribution<int>(0, 6)(rng);
    const auto r = oracles::random_qp(rng, n, me, mi);
    const auto oracle = oracles::enumerate_active_sets(r.p, r.q, r.a_eq, r.b_eq, r.g, r.h);
    ASSERT_TRUE(oracle.feasible);
    const auto qp = from_random(r);
    const auto sol = solve(qp);
    ASSERT_TRUE(sol.optimal()) << "trial " << trial << ": " << sol.message;
    EXPECT_LE((sol.z - oracle.z).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
    EXPECT_LE(std::abs(sol.objective - oracle.objective), 1e-6) << "trial " << trial;
    // independent KKT recomputation
    const auto kkt = kkt_residuals(qp, sol.z, sol.duals_eq, sol.duals_ineq);
    EXPECT_LE(kkt.max(), 1e-9) << "trial " << trial;
    EXPECT_GE(sol.duals_ineq.size() ? sol.duals_ineq.minCoeff() : 0.0, -1e-9);
    for (int i : sol.active_set) {
      EXPECT_LE(std::abs(qp.G.row(i).dot(sol.z) - qp.h(i)), 1e-8);
    }
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(QpSolve, ArgminInvariantUnderPositiveCostScaling) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const auto r = oracles::random_qp(rng, 6, 1, 5);
    auto qp = from_random(r);
    const auto base = solve(qp);
    ASSERT_TRUE(base.optimal());
    for (double c : {1e-3, 0.5, 17.0, 1e4}) {
      auto scaled = qp;
      scaled.P *= c;
      scaled.q *= c;
      const auto sol = solve(scaled);
      ASSERT_TRUE(sol.optimal());
      EXPECT_LE((sol.z - base.z).cwiseAbs().maxCoeff(), 1e-9) << "scale " << c;
    }
  }
}

TEST(QpSolve, InconsistentEqualitiesAreInfeasible) {
  auto qp = QuadraticProgram::with_variables(2);
  qp.P.setIdentity();
  qp.A_eq.resize(2, 2);
  qp.A_eq << 1, 1,
             1, 1;
  qp.b_eq = Eigen::Vector2d(1.0, 2.0);
  EXPECT_EQ(solve(qp).status, QpStatus::Infeasible);
}

TEST(QpSolve, EmptyPolytopeIsInfeasible) {
  auto qp = QuadraticProgram::with_variables(2);
  qp.P.setIdentity();
  qp.G.resize(2, 2);
  qp.G << 1, 0,
         -1, 0;
  qp.h = Eigen::Vector2d(-1.0, -1.0);  // z0 <= -1 and z0 >= 1
  const auto sol = solve(qp);
  EXPECT_EQ(sol.status, QpStatus::Infeasible) << sol.message;
}

TEST(QpSolve, InfeasibleStartIsRepairedByPhaseOne) {
  auto qp = QuadraticProgram::with_variables(2);
  qp.P.setIdentity();
  qp.G.resize(2, 2);
  qp.G << -1, 0,
           0, -1;
  qp.h = Eigen::Vector2d(-3.0, -4.0);  // z >= (3, 4)
  const auto sol = solve(qp);
  ASSERT_TRUE(sol.optimal()) << sol.message;
  EXPECT_NEAR(sol.z(0), 3.0, 1e-12);
  EXPECT_NEAR(sol.z(1), 4.0, 1e-12);
  EXPECT_NEAR(sol.duals_ineq(0), 3.0, 1e-10);
  EXPECT_NEAR(sol.duals_ineq(1), 4.0, 1e-10);
}

TEST(QpSolve, SingularReducedHessianIsReported) {
  auto qp = QuadraticProgram::with_variables(2);
  qp.P(0, 0) = 1.0;
  qp.q(1) = -1.0;
  const auto sol = solve(qp);
  EXPECT_EQ(sol.status, QpStatus::Unbounded);
}

TEST(QpSolve, SemidefiniteCostStrictlyConvexOnNullSpaceIsSolved) {
  auto qp = QuadraticProgram::with_variables(2);
  qp.P(0, 0) = 2.0;  // no curvature in z1, but z1 is pinned
  qp.A_eq = Eigen::RowVector2d(0.0, 1.0);
  qp.b_eq = Eigen::VectorXd::Constant(1, 3.0);
  qp.q(0) = -2.0;
  const auto sol = solve(qp);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.z(0), 1.0, 1e-12);
  EXPECT_NEAR(sol.z(1), 3.0, 1e-12);
}

TEST(QpSolve, FullyDeterminedPointWithSlackInequalities) {
  auto qp = QuadraticProgram::with_variables(1);
  qp.P(0, 0) = 1.0;
  qp.A_eq = Eigen::MatrixXd::Constant(1, 1, 1.0);
  qp.b_eq = Eigen::VectorXd::Constant(1, 0.5);
  qp.G = Eigen::MatrixXd::Constant(1, 1, 1.0);
  qp.h = Eigen::VectorXd::Constant(1, 5.0);
  const auto sol = solve(qp);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.z(0), 0.5, 1e-15);
  EXPECT_LE(sol.kkt.max(), 1e-12);
}

TEST(QpSolve, RejectsAsymmetricHessian) {
  auto qp = QuadraticProgram::with_variables(2);
  qp.P << 1, 1,
          0, 1;
  EXPECT_THROW(solve(qp), ShapeError);
}

TEST(Licq, SingleEqualityRowHolds) {
  auto qp = QuadraticProgram::with_variables(2);
  qp.A_eq = Eigen::RowVector2d(1.0, 0.0);
  qp.b_eq = Eigen::VectorXd::Constant(1, 1.0);
  const auto report = check_licq(qp, Eigen::Vector2d(1.0, 0.0));
  EXPECT_TRUE(report.holds);
  EXPECT_EQ(report.rank, 1);
}

TEST(Licq, DuplicatedEqualityRowFails) {
  auto qp = QuadraticProgram::with_variables(2);
  qp.A_eq.resize(2, 2);
  qp.A_eq << 1, 0,
             1, 0;
  qp.b_eq = Eigen::Vector2d(1.0, 1.0);
  const auto report = check_licq(qp, Eigen::Vector2d(1.0, 0.0));
  EXPECT_FALSE(report.holds);
  EXPECT_EQ(report.rank, 1);
  EXPECT_EQ(report.rows, 2);
}

TEST(Licq, ActiveInequalityCountsAndInfeasiblePointThrows) {
  auto qp = QuadraticProgram::with_variables(2);
  qp.A_eq = Eigen::RowVector2d(1.0, 0.0);
  qp.b_eq = Eigen::VectorXd::Constant(1, 1.0);
  qp.G = Eigen::RowVector2d(1.0, 0.0);
  qp.h = Eigen::VectorXd::Constant(1, 1.0);
  const auto report = check_licq(qp, Eigen::Vector2d(1.0, 0.0));
  EXPECT_FALSE(report.holds);  // active bound parallel to the equality
  EXPECT_EQ(report.active_rows, std::vector<int>{0});
  EXPECT_THROW(check_licq(qp, Eigen::Vector2d(2.0, 0.0)), PreconditionError);
}

TEST(Pseudoinverse, IdentityAndRowVector) {
  EXPECT_TRUE(pseudoinverse(Eigen::MatrixXd::Identity(3, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  const Eigen::MatrixXd row = Eigen::RowVector2d(1.0, 0.0);
  const Eigen::MatrixXd pinv = pseudoinverse(row);
  ASSERT_EQ(pinv.rows(), 2);
  ASSERT_EQ(pinv.cols(), 1);
  EXPECT_NEAR(pinv(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(pinv(1, 0), 0.0, 1e-15);
}

TEST(Pseudoinverse, PenroseIdentitiesOnRandomMatrices) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(6, 10);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = nd(rng);
    if (trial % 2 == 1) a.row(5) = a.row(0) + 2.0 * a.row(1);  // rank deficient
    EXPECT_LE(penrose_residuals(a, pseudoinverse(a)).max(), 1e-8) << "trial " << trial;
  }
}

TEST(NullSpace, IdentityHasEmptyKernel) {
  const auto ns = null_space_parametrization(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(ns.null_basis.cols(), 0);
  EXPECT_TRUE(ns.pinv.isApprox(Eigen::MatrixXd::Identity(3, 3)));
}

TEST(NullSpace, RowVectorKernelIsSecondAxis) {
  const auto ns = null_space_parametrization(Eigen::RowVector2d(1.0, 0.0));
  ASSERT_EQ(ns.null_basis.cols(), 1);
  EXPECT_NEAR(std::abs(ns.null_basis(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(ns.null_basis(0, 0), 0.0, 1e-15);
}

TEST(NullSpace, RandomWideMatrixResidualsAndOrthogonalSplit) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd h(8, 20);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = nd(rng);
  const auto ns = null_space_parametrization(h);
  ASSERT_EQ(ns.rank, 8);
  ASSERT_EQ(ns.null_basis.cols(), 12);
  EXPECT_LE((h * ns.null_basis).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((ns.null_basis.transpose() * ns.null_basis - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff(),
            1e-10);
  Eigen::VectorXd x(20);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = nd(rng);
  const Eigen::VectorXd z = h * x;  // in range by construction
  EXPECT_LE((h * (ns.pinv * z) - z).cwiseAbs().maxCoeff(), 1e-10);
  Eigen::VectorXd w(12);
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = nd(rng);
  const Eigen::VectorXd a = ns.pinv * z + ns.null_basis * w;
  EXPECT_NEAR(a.squaredNorm(), (ns.pinv * z).squaredNorm() + (ns.null_basis * w).squaredNorm(), 1e-9);
}

TEST(QpDebugDump, RoundTripsThroughText) {
  std::mt19937_64 rng(5);
  const auto qp = from_random(oracles::random_qp(rng, 4, 1, 3));
  std::stringstream buf;
  write_qp_debug(buf, qp);
  const auto back = read_qp_debug(buf);
  EXPECT_EQ(back.P, qp.P);
  EXPECT_EQ(back.h, qp.h);
  EXPECT_EQ(back.A_eq, qp.A_eq);
}
