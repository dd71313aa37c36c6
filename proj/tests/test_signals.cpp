#include "ddmpc/signals.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "ddmpc/errors.hpp"
#include "oracles.hpp"

using namespace ddmpc;

namespace {

Sequence scalars(std::initializer_list<double> values) {
  Sequence s;
  for (double v : values) s.push_back(Eigen::VectorXd::Constant(1, v));
  return s;
}

Sequence random_sequence(std::mt19937_64& rng, int dim, int length) {
  std::normal_distribution<double> nd;
  Sequence s;
  for (int k = 0; k < length; ++k) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = nd(rng);
    s.push_back(v);
  }
  return s;
}

Sequence plus_minus_one(std::mt19937_64& rng, int length) {
  std::bernoulli_distribution coin(0.5);
  Sequence s;
  for (int k = 0; k < length; ++k) s.push_back(Eigen::VectorXd::Constant(1, coin(rng) ? 1.0 : -1.0));
  return s;
}

}  // namespace

TEST(Hankel, ScalarDepthTwo) {
  const auto h = build_hankel(scalars({1, 2, 3}), 2);
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 2,
              2, 3;
  EXPECT_EQ(h.entries, expected);
  EXPECT_EQ(h.depth, 2);
  EXPECT_EQ(h.block_dim, 1);
}

TEST(Hankel, SingleWindowOfVectors) {
  const Sequence seq{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
  const auto h = build_hankel(seq, 1);
  EXPECT_EQ(h.entries, Eigen::MatrixXd::Identity(2, 2));
}

TEST(Hankel, EntriesMatchIndexOracle) {
  std::mt19937_64 rng(1);
  const auto seq = random_sequence(rng, 1, 10);
  const auto h = build_hankel(seq, 3);
  ASSERT_EQ(h.entries.rows(), 3);
  ASSERT_EQ(h.entries.cols(), 8);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 8; ++j) EXPECT_EQ(h.entries(i, j), seq[i + j](0));
}

TEST(Hankel, ShiftPropertyHoldsBlockwise) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int q = 1 + trial % 3;
    const int length = 8 + trial;
    const int depth = 1 + trial % 5;
    const auto h = build_hankel(random_sequence(rng, q, length), depth);
    for (int i = 0; i + 1 < depth; ++i)
      for (int j = 0; j + 1 < h.columns(); ++j)
        EXPECT_EQ(h.entries.block(static_cast<Eigen::Index>(i + 1) * q, j, q, 1),
                  h.entries.block(static_cast<Eigen::Index>(i) * q, j + 1, q, 1));
  }
}

TEST(Hankel, Errors) {
  EXPECT_THROW(build_hankel(scalars({1, 2}), 3), WindowTooDeepError);
  const Sequence ragged{Eigen::Vector2d(1, 0), Eigen::VectorXd::Constant(1, 1.0)};
  EXPECT_THROW(build_hankel(ragged, 1), ShapeError);
  EXPECT_THROW(build_hankel(Sequence{}, 1), ShapeError);
}

TEST(PersistentExcitation, ConstantSequence) {
  const Sequence ones(10, Eigen::VectorXd::Constant(1, 1.0));
  EXPECT_TRUE(is_persistently_exciting(ones, 1).exciting);
  EXPECT_FALSE(is_persistently_exciting(ones, 2).exciting);
}

TEST(PersistentExcitation, AgreesWithSvdOracle) {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 25; ++trial) {
    const auto seq = plus_minus_one(rng, 40);
    for (int order : {2, 4, 6, 10}) {
      const auto report = is_persistently_exciting(seq, order);
      Eigen::MatrixXd h(order, 40 - order + 1);
      for (int i = 0; i < order; ++i)
        for (int j = 0; j < h.cols(); ++j) h(i, j) = seq[i + j](0);
      EXPECT_EQ(report.exciting, oracles::svd_rank(h) == order) << "trial " << trial << " order " << order;
    }
  }
}

TEST(PersistentExcitation, MonotoneInOrder) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto seq = plus_minus_one(rng, 30);
    int highest = 0;
    for (int order = 1; order <= 15; ++order) {
      if (is_persistently_exciting(seq, order).exciting) highest = order;
    }
    for (int order = 1; order <= highest; ++order) {
      EXPECT_TRUE(is_persistently_exciting(seq, order).exciting);
    }
  }
}

TEST(PersistentExcitation, TooShortSequenceIsNotExciting) {
  const auto report = is_persistently_exciting(scalars({1, -1, 1}), 3);
  EXPECT_FALSE(report.exciting);
  EXPECT_THROW(is_persistently_exciting(Sequence{}, 1), ShapeError);
}

TEST(Window, FullAndSingleton) {
  const auto seq = scalars({5, 6, 7});
  EXPECT_EQ(extract_window(seq, 0, 2), Eigen::Vector3d(5, 6, 7));
  EXPECT_EQ(extract_window(seq, 1, 1), Eigen::VectorXd::Constant(1, 6.0));
  EXPECT_THROW(extract_window(seq, 1, 3), IndexError);
  EXPECT_THROW(extract_window(seq, 2, 1), IndexError);
  EXPECT_THROW(extract_window(seq, -1, 1), IndexError);
}

TEST(Window, MatchesConcatenationOracle) {
  std::mt19937_64 rng(8);
  const auto seq = random_sequence(rng, 3, 7);
  Eigen::VectorXd expected(9);
  expected << seq[2], seq[3], seq[4];
  EXPECT_EQ(extract_window(seq, 2, 4), expected);
}

TEST(ExtendedStateTest, InputBlockAboveOutputBlock) {
  const auto xi = extended_state(scalars({7, 2}), scalars({9, 3}), 1);
  EXPECT_EQ(xi.stacked(), Eigen::Vector2d(2, 3));

  const auto xi2 = extended_state(scalars({1.5, 2.5}), scalars({-1, -2}), 2);
  Eigen::Vector4d expected(1.5, 2.5, -1, -2);
  EXPECT_EQ(xi2.stacked(), expected);
}

TEST(ExtendedStateTest, ZeroHistoriesAndInsufficientHistory) {
  const auto xi = extended_state(zeros(2, 3), zeros(1, 3), 3);
  EXPECT_EQ(xi.stacked().size(), 9);
  EXPECT_EQ(xi.stacked().squaredNorm(), 0.0);
  EXPECT_THROW(extended_state(zeros(1, 1), zeros(1, 2), 2), InsufficientHistoryError);
}

TEST(ExtendedStateTest, StackingRoundTripIsExact) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 2;
    const int p = 1 + (trial / 2) % 2;
    const int n = 1 + trial % 4;
    const auto u = random_sequence(rng, m, n + 3);
    const auto y = random_sequence(rng, p, n + 3);
    const auto xi = extended_state(u, y, n);
    const auto back = ExtendedState::from_stacked(xi.stacked(), m, p, n);
    const auto u_back = unstack(back.u_past, m);
    const auto y_back = unstack(back.y_past, p);
    for (int k = 0; k < n; ++k) {
      EXPECT_EQ(u_back[k], u[u.size() - n + k]);
      EXPECT_EQ(y_back[k], y[y.size() - n + k]);
    }
  }
}

TEST(Membership, ZeroCandidateIsAlwaysMember) {
  std::mt19937_64 rng(3);
  const TrajectoryData data(random_sequence(rng, 1, 30), random_sequence(rng, 1, 30));
  const TrajectoryData zero(zeros(1, 5), zeros(1, 5));
  const auto res = membership_residual(data, zero);
  EXPECT_EQ(res.residual, 0.0);
  EXPECT_EQ(res.alpha.norm(), 0.0);
}

TEST(Membership, SameSystemIsMemberAndDifferentSystemIsNot) {
  oracles::RandomSystem sys{Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::MatrixXd::Constant(1, 1, 1.0),
                            Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Zero(1, 1)};
  std::mt19937_64 rng(4);
  const auto u = plus_minus_one(rng, 60);
  const TrajectoryData data(u, oracles::simulate_outputs(sys, Eigen::VectorXd::Constant(1, 0.3), u));
  const int horizon = 6;

  const auto uc = random_sequence(rng, 1, horizon);
  const TrajectoryData member(uc, oracles::simulate_outputs(sys, Eigen::VectorXd::Constant(1, -1.2), uc));
  const auto res = membership_residual(data, member, 1);
  EXPECT_TRUE(res.excitation_sufficient);
  EXPECT_LE(res.residual, 1e-8);

  auto other = sys;
  other.a(0, 0) = 0.8;
  const TrajectoryData outsider(uc, oracles::simulate_outputs(other, Eigen::VectorXd::Constant(1, -1.2), uc));
  EXPECT_GT(membership_residual(data, outsider, 1).residual, 1e-3);
}

TEST(Membership, DimensionMismatchThrows) {
  const TrajectoryData data(zeros(1, 10), zeros(1, 10));
  const TrajectoryData wrong(zeros(2, 3), zeros(1, 3));
  EXPECT_THROW(membership_residual(data, wrong), ShapeError);
}

TEST(TrajectoryDataTest, Invariants) {
  EXPECT_THROW(TrajectoryData(zeros(1, 3), zeros(1, 2)), ShapeError);
  EXPECT_THROW(TrajectoryData(Sequence{}, Sequence{}), ShapeError);
  const TrajectoryData d(zeros(2, 4), zeros(3, 4));
  EXPECT_EQ(d.m(), 2);
  EXPECT_EQ(d.p(), 3);
  EXPECT_EQ(d.size(), 4);
}

TEST(TrajectoryCsv, RoundTripIsBitExact) {
  std::mt19937_64 rng(21);
  const TrajectoryData d(random_sequence(rng, 2, 12), random_sequence(rng, 1, 12), random_sequence(rng, 1, 12));
  const auto path = std::filesystem::temp_directory_path() / "ddmpc_traj_roundtrip.csv";
  write_trajectory_csv(path, d);
  const auto back = read_trajectory_csv(path);
  ASSERT_EQ(back.size(), 12);
  ASSERT_TRUE(back.clean_outputs().has_value());
  for (int k = 0; k < 12; ++k) {
    EXPECT_EQ(back.inputs()[k], d.inputs()[k]);
    EXPECT_EQ(back.outputs()[k], d.outputs()[k]);
    EXPECT_EQ((*back.clean_outputs())[k], (*d.clean_outputs())[k]);
  }
  std::filesystem::remove(path);
}

TEST(TrajectoryCsv, MissingFileAndMissingHeader) {
  EXPECT_THROW(read_trajectory_csv("/nonexistent/ddmpc.csv"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "ddmpc_noheader.csv";
  {
    std::ofstream out(path);
    out << "0,1,2\n1,3,4\n";
  }
  EXPECT_THROW(read_trajectory_csv(path), IoError);
  std::filesystem::remove(path);
}
