#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <vector>

#include "ratekit/core.hpp"
#include "ratekit/error.hpp"

namespace ratekit {
namespace {

Matrix random_spd(int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Matrix a(p, p + 3);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
  return a * a.transpose() / static_cast<double>(p) + 0.1 * Matrix::Identity(p, p);
}

TEST(CholSpd, ReconstructsMatrix) {
  const Matrix s = random_spd(12, 1);
  const SpdFactor f = chol_spd(s, 0.0);
  EXPECT_EQ(f.jitter_used, 0.0);
  const Matrix back = f.lower * f.lower.transpose();
  EXPECT_LT((back - s).norm() / s.norm(), 1e-12);
}

TEST(CholSpd, LogDetMatchesEigenvalues) {
  const Matrix s = random_spd(9, 2);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const double expected = eig.eigenvalues().array().log().sum();
  EXPECT_NEAR(chol_spd(s, 0.0).log_det, expected, 1e-10);
}

TEST(CholSpd, JitterFollowsTraceScale) {
  const Matrix s = random_spd(6, 3);
  const SpdFactor f = chol_spd(s, 1e-8);
  EXPECT_NEAR(f.jitter_used, 1e-8 * s.trace() / 6.0, 1e-20);
}

TEST(CholSpd, EscalatesOnSingularInput) {
  Matrix g(5, 2);
  g << 1, 0, 0, 1, 1, 1, 2, -1, 0, 3;
  const Matrix s = g * g.transpose();  // rank 2
  const SpdFactor f = chol_spd(s, 0.0);
  EXPECT_GT(f.jitter_used, 0.0);
  const Matrix back = f.lower * f.lower.transpose();
  EXPECT_LT((back - s - f.jitter_used * Matrix::Identity(5, 5)).norm(), 1e-9);
}

TEST(CholSpd, RejectsAsymmetric) {
  Matrix s = Matrix::Identity(3, 3);
  s(0, 1) = 0.5;
  EXPECT_THROW(chol_spd(s), InvalidInput);
}

TEST(CholSpd, RejectsNegativeDefinite) {
  const Matrix s = -Matrix::Identity(4, 4);
  EXPECT_THROW(chol_spd(s, 1e-8), NotPositiveDefinite);
}

TEST(SpdInverse, ProductIsIdentity) {
  const Matrix s = random_spd(15, 4);
  const Matrix inv = spd_inverse(s, 0.0);
  EXPECT_LT((s * inv - Matrix::Identity(15, 15)).norm(), 1e-10);
  EXPECT_EQ((inv - inv.transpose()).norm(), 0.0);
}

TEST(SpdFactor, SolveMatchesInverse) {
  const Matrix s = random_spd(7, 5);
  const Matrix b = Matrix::Random(7, 2);
  const SpdFactor f = chol_spd(s, 0.0);
  EXPECT_LT((s * f.solve(b) - b).norm(), 1e-10);
}

TEST(CenterColumns, ColumnMeansVanish) {
  Matrix m(4, 2);
  m << 1, 10, 2, 20, 3, 30, 6, 40;
  const Matrix c = center_columns(m);
  EXPECT_NEAR(c.col(0).sum(), 0.0, 1e-12);
  EXPECT_NEAR(c.col(1).sum(), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(c(3, 0), 3.0);
  EXPECT_DOUBLE_EQ(c(0, 1), -15.0);
}

TEST(Gram, IsSymmetric) {
  const Matrix g = Matrix::Random(6, 4);
  const Matrix s = gram(g);
  EXPECT_EQ((s - s.transpose()).norm(), 0.0);
  EXPECT_LT((s - g * g.transpose()).norm(), 1e-12);
}

TEST(LogDetGeneral, MatchesProductOfEigenvalues) {
  Matrix a(2, 2);
  a << 2, 1, 0.5, 3;
  EXPECT_NEAR(log_det_general(a), std::log(5.5), 1e-14);
  Matrix neg(2, 2);
  neg << 0, 1, 1, 0;
  EXPECT_THROW(log_det_general(neg), NumericalError);
}

TEST(AllFinite, DetectsNan) {
  Matrix m = Matrix::Zero(2, 2);
  EXPECT_TRUE(all_finite(m));
  m(1, 1) = std::nan("");
  EXPECT_FALSE(all_finite(m));
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<int> hits(257, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

}  // namespace
}  // namespace ratekit
