#include <gtest/gtest.h>

#include <random>
#include <Eigen/Dense>

#include "darcy/linsolve.hpp"

using namespace darcy;

TEST(Compress, SumsDuplicates) {
  const std::vector<Triplet> t{{0, 0, 1.0}, {0, 0, 2.0}};
  const auto a = compress(1, 1, t);
  EXPECT_EQ(a.nonzeros(), 1u);
  EXPECT_DOUBLE_EQ(a.coeff(0, 0), 3.0);
}

TEST(Compress, EmptyIsZeroMatrix) {
  const auto a = compress(3, 3, std::vector<Triplet>{});
  EXPECT_EQ(a.rows(), 3);
  EXPECT_EQ(a.nonzeros(), 0u);
  const std::vector<double> x{1.0, 2.0, 3.0};
  for (double v : a.multiply(x)) EXPECT_EQ(v, 0.0);
}

TEST(Compress, RandomProductMatchesDense) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> idx(0, 19);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<Triplet> t;
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(20, 20);
  for (int k = 0; k < 300; ++k) {
    const Triplet tr{idx(rng), idx(rng), val(rng)};
    t.push_back(tr);
    dense(tr.row, tr.col) += tr.value;
  }
  const auto a = compress(20, 20, t);
  std::vector<double> x(20);
  for (auto& v : x) v = val(rng);
  const auto y = a.multiply(x);
  const Eigen::VectorXd yd = dense * Eigen::Map<const Eigen::VectorXd>(x.data(), 20);
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(y[static_cast<std::size_t>(i)], yd(i), 1e-13);
  EXPECT_LT((a.to_dense() - dense).cwiseAbs().maxCoeff(), 1e-14);
  for (int i = 0; i < 20; ++i) {
    const auto rp = a.row_ptr();
    for (int k = rp[static_cast<std::size_t>(i)] + 1; k < rp[static_cast<std::size_t>(i) + 1]; ++k)
      EXPECT_LT(a.col_idx()[static_cast<std::size_t>(k - 1)], a.col_idx()[static_cast<std::size_t>(k)]);
  }
}

TEST(Compress, RejectsOutOfRangeTriplet) {
  const std::vector<Triplet> t{{0, 3, 1.0}};
  EXPECT_THROW(compress(3, 3, t), std::out_of_range);
}

TEST(Compress, SymmetryDetection) {
  const std::vector<Triplet> sym{{0, 1, 2.0}, {1, 0, 2.0}, {0, 0, 1.0}};
  EXPECT_TRUE(compress(2, 2, sym).is_symmetric());
  const std::vector<Triplet> nonsym{{0, 1, 2.0}, {1, 0, 1.0}};
  const auto a = compress(2, 2, nonsym);
  EXPECT_FALSE(a.is_symmetric());
  EXPECT_DOUBLE_EQ(a.max_asymmetry(), 1.0);
}

TEST(Solve, Diagonal) {
  const std::vector<Triplet> t{{0, 0, 2.0}, {1, 1, 3.0}};
  const std::vector<double> b{2.0, 3.0};
  SolveReport r;
  const auto x = solve(compress(2, 2, t), b, true, &r);
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
  EXPECT_LE(r.relative_residual, kResidualTolerance);
}

TEST(Solve, IdentityReturnsRhs) {
  std::vector<Triplet> t;
  for (int i = 0; i < 5; ++i) t.push_back({i, i, 1.0});
  const std::vector<double> b{1.0, -2.0, 3.5, 0.0, 7.0};
  const auto x = solve(compress(5, 5, t), b);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(x[i], b[i]);
}

TEST(Solve, RandomSpdMatchesDenseOracle) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  const int n = 50;
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = val(rng);
  const Eigen::MatrixXd a = g * g.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) t.push_back({i, j, a(i, j)});
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b(i) = val(rng);
  const Eigen::VectorXd oracle = a.llt().solve(b);
  const auto x = solve(compress(n, n, t), std::vector<double>(b.data(), b.data() + n), true);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(x[static_cast<std::size_t>(i)], oracle(i), 1e-9);
}

TEST(Solve, NonsymmetricIndefinite) {
  const std::vector<Triplet> t{{0, 1, 1.0}, {1, 0, -2.0}, {1, 1, 0.5}};
  const std::vector<double> b{3.0, 1.0};
  const auto a = compress(2, 2, t);
  const auto x = solve(a, b);
  EXPECT_LE(relative_residual(a, x, b), 1e-14);
}

TEST(Solve, ZeroRhsGivesZero) {
  const std::vector<Triplet> t{{0, 0, 4.0}, {1, 1, 1.0}};
  const auto x = solve(compress(2, 2, t), std::vector<double>{0.0, 0.0});
  EXPECT_EQ(x, (std::vector<double>{0.0, 0.0}));
}

TEST(Solve, SingularThrowsNumericalError) {
  const std::vector<Triplet> t{{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}};
  EXPECT_THROW(solve(compress(2, 2, t), std::vector<double>{1.0, 2.0}), NumericalError);
}

TEST(Solve, DimensionChecks) {
  const std::vector<Triplet> t{{0, 0, 1.0}};
  EXPECT_THROW(solve(compress(1, 2, t), std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(solve(compress(1, 1, t), std::vector<double>{1.0, 2.0}), std::invalid_argument);
  EXPECT_TRUE(solve(compress(0, 0, std::vector<Triplet>{}), std::vector<double>{}).empty());
}
