#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "ratekit/error.hpp"
#include "ratekit/rate.hpp"

namespace ratekit {
namespace {

PrecisionModel two_by_two() {
  Vector mu(2);
  mu << 1.0, 0.0;
  Matrix omega(2, 2);
  omega << 1.0, 0.5, 0.5, 1.0;
  return precision_from_covariance(mu, omega, 0.0);
}

TEST(KldVariable, TwoByTwoClosedForm) {
  const PrecisionModel pm = two_by_two();
  // 1/2 [ 1/3 - ln(4/3) + 1/3 ]
  const double expected = 0.5 * (2.0 / 3.0 - std::log(4.0 / 3.0));
  EXPECT_NEAR(expected, 0.18949229710744284, 1e-15);
  EXPECT_NEAR(kld_variable_naive(pm, 0), expected, 1e-12);
  EXPECT_NEAR(kld_variable_fast(pm, 0), expected, 1e-12);
  EXPECT_NEAR(mutual_info(pm, 0), 0.14384103622589045, 1e-12);
  EXPECT_NEAR(mutual_info(pm, 0), -0.5 * std::log(0.75), 1e-12);
}

TEST(KldVariable, OracleAgreesOnTwoByTwo) {
  Vector mu(2);
  mu << 1.0, 0.0;
  Matrix omega(2, 2);
  omega << 1.0, 0.5, 0.5, 1.0;
  EXPECT_NEAR(oracle::conditional_kl(mu, omega, {0}), 0.18949229710744284, 1e-12);
}

TEST(KldVariable, FastMatchesNaiveAndOracle) {
  for (int trial = 0; trial < 5; ++trial) {
    const auto model = oracle::random_model(30, 100 + trial);
    const PrecisionModel pm = precision_from_covariance(model.mu, model.omega, 0.0);
    for (int j = 0; j < 30; ++j) {
      const double naive = kld_variable_naive(pm, j);
      EXPECT_NEAR(kld_variable_fast(pm, j), naive, 1e-8 * (1.0 + naive));
      EXPECT_NEAR(naive, oracle::conditional_kl(model.mu, model.omega, {j}), 1e-8 * (1.0 + naive));
    }
  }
}

TEST(KldVariable, NonNegative) {
  const auto model = oracle::random_model(10, 7);
  const PrecisionModel pm = precision_from_covariance(model.mu, model.omega);
  for (int j = 0; j < 10; ++j) EXPECT_GE(kld_variable_fast(pm, j), 0.0);
}

TEST(KldVariable, InconsistentPrecisionIsRejected) {
  PrecisionModel pm = two_by_two();
  pm.lambda = Matrix::Identity(2, 2) * 0.5;
  EXPECT_THROW(kld_variable_fast(pm, 0), NumericalError);
}

TEST(KldGroup, MatchesConditionalOracle) {
  const auto model = oracle::random_model(12, 11);
  const PrecisionModel pm = precision_from_covariance(model.mu, model.omega, 0.0);
  const std::vector<std::vector<int>> groups{{0, 3}, {1, 2, 5, 9}, {11}, {4, 6, 7, 8, 10}};
  for (const auto& g : groups) {
    const double expected = oracle::conditional_kl(model.mu, model.omega, g);
    EXPECT_NEAR(kld_group(pm, g), expected, 1e-8 * (1.0 + expected));
    EXPECT_NEAR(kld_group_fast(pm, g), expected, 1e-8 * (1.0 + expected));
  }
}

TEST(KldGroup, SingletonEqualsVariable) {
  const auto model = oracle::random_model(8, 12);
  const PrecisionModel pm = precision_from_covariance(model.mu, model.omega, 0.0);
  for (int j = 0; j < 8; ++j) {
    EXPECT_NEAR(kld_group(pm, {j}), kld_variable_naive(pm, j), 1e-10);
  }
}

TEST(KldGroup, RejectsBadGroups) {
  const PrecisionModel pm = two_by_two();
  EXPECT_THROW(kld_group(pm, {}), InvalidInput);
  EXPECT_THROW(kld_group(pm, {0, 1}), InvalidInput);
  EXPECT_THROW(kld_group(pm, {2}), InvalidInput);
  EXPECT_THROW(kld_group_fast(pm, {0, 0}), InvalidInput);
}

TEST(RateScores, NormalizedWithThreshold) {
  const auto model = oracle::random_model(20, 13);
  const PrecisionModel pm = precision_from_covariance(model.mu, model.omega);
  for (KldPath path : {KldPath::fast, KldPath::naive}) {
    const ImportanceReport r = rate_scores(pm, path);
    double total = 0.0;
    for (const auto& item : r.items) {
      total += item.rate;
      EXPECT_GE(item.rate, 0.0);
      EXPECT_LE(item.rate, 1.0);
      EXPECT_EQ(item.significant, item.rate > 1.0 / 20.0);
      ASSERT_TRUE(item.mi.has_value());
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_FALSE(r.degenerate);
  }
}

TEST(RateScores, SignsAndNames) {
  const PrecisionModel pm = two_by_two();
  const ImportanceReport r = rate_scores(pm, KldPath::fast, {"a", "b"});
  EXPECT_EQ(r.items[0].name, "a");
  EXPECT_EQ(r.items[0].sign, 1);
  EXPECT_EQ(r.items[1].sign, 0);
  EXPECT_THROW(rate_scores(pm, KldPath::fast, {"a"}), InvalidInput);
}

TEST(RateScores, IdentityCovarianceIsDegenerate) {
  const PrecisionModel pm = precision_from_covariance(Vector::Ones(4), Matrix::Identity(4, 4), 0.0);
  const ImportanceReport r = rate_scores(pm);
  EXPECT_TRUE(r.degenerate);
  EXPECT_FALSE(r.warnings.empty());
  for (const auto& item : r.items) {
    EXPECT_DOUBLE_EQ(item.rate, 0.25);
    EXPECT_FALSE(item.significant);
  }
}

TEST(RateScores, BlockDiagonalZeroesOutsideBlock) {
  auto block = oracle::random_model(4, 21);
  Matrix omega = Matrix::Zero(10, 10);
  omega.topLeftCorner(4, 4) = block.omega;
  for (int j = 4; j < 10; ++j) omega(j, j) = 0.5 + 0.1 * j;
  Vector mu(10);
  for (int j = 0; j < 10; ++j) mu(j) = 3.0 * std::sin(1.0 + j);
  const PrecisionModel pm = precision_from_covariance(mu, omega);
  for (int j = 4; j < 10; ++j) {
    EXPECT_NEAR(kld_variable_fast(pm, j), 0.0, 1e-10);
    EXPECT_NEAR(kld_variable_naive(pm, j), 0.0, 1e-10);
  }
  EXPECT_NEAR(kld_group(pm, {5, 7, 9}), 0.0, 1e-10);
  EXPECT_NEAR(kld_group_fast(pm, {5, 7, 9}), 0.0, 1e-10);
  EXPECT_GT(kld_variable_fast(pm, 0), 1e-6);
}

TEST(RateScores, AffineInvariance) {
  const auto model = oracle::random_model(15, 31);
  const PrecisionModel base = precision_from_covariance(model.mu, model.omega);
  const ImportanceReport ref = rate_scores(base);
  for (double a : {0.1, 3.0, -2.0}) {
    const PrecisionModel scaled = precision_from_covariance(a * model.mu, a * a * model.omega);
    const ImportanceReport r = rate_scores(scaled);
    for (int j = 0; j < 15; ++j) {
      const auto& x = r.items[static_cast<std::size_t>(j)];
      const auto& y = ref.items[static_cast<std::size_t>(j)];
      EXPECT_NEAR(x.kld, y.kld, 1e-10 * std::abs(y.kld));
      EXPECT_NEAR(x.rate, y.rate, 1e-10 * std::abs(y.rate));
      EXPECT_NEAR(*x.mi, *y.mi, 1e-10 * std::abs(*y.mi));
    }
  }
}

TEST(GroupRate, SingletonsReproduceRate) {
  const auto model = oracle::random_model(9, 41);
  const PrecisionModel pm = precision_from_covariance(model.mu, model.omega);
  const ImportanceReport single = rate_scores(pm);
  const ImportanceReport grouped = group_rate(pm, GroupMap::singletons(9));
  ASSERT_EQ(grouped.items.size(), 9u);
  EXPECT_TRUE(grouped.is_group);
  for (std::size_t j = 0; j < 9; ++j) {
    EXPECT_NEAR(grouped.items[j].rate, single.items[j].rate, 1e-9);
  }
}

TEST(GroupRate, OverlapWarns) {
  const auto model = oracle::random_model(6, 42);
  const PrecisionModel pm = precision_from_covariance(model.mu, model.omega);
  GroupMap groups;
  groups.add("a", {0, 1});
  groups.add("b", {1, 2});
  const ImportanceReport r = group_rate(pm, groups);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_NEAR(r.items[0].rate + r.items[1].rate, 1.0, 1e-12);
}

TEST(GroupMap, Validation) {
  GroupMap g;
  g.add("all", {0, 1, 2});
  EXPECT_THROW(g.validate(3), InvalidInput);
  GroupMap h;
  h.add("out", {5});
  EXPECT_THROW(h.validate(3), InvalidInput);
  EXPECT_THROW(kld_path_from_string("slow"), InvalidInput);
}

TEST(BuildPrecision, FromFactorMatchesGram) {
  Matrix f(3, 2);
  f << 1, 0, 0.5, 1, -1, 2;
  const PrecisionModel pm = build_precision(Vector::Zero(3), f, 0.0);
  EXPECT_GT(pm.jitter, 0.0);  // rank 2 of 3 requires escalation
  const Matrix diff = pm.omega - f * f.transpose();
  EXPECT_LT((diff - pm.jitter * Matrix::Identity(3, 3)).norm(), 1e-14);
  EXPECT_TRUE(pm.lambda.allFinite());
}

}  // namespace
}  // namespace ratekit
