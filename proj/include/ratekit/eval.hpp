#pragma once

// Ranking evaluation: ROC against a known causal mask, accuracy degradation
// under column shuffling, and the marginal correlation / t-test baselines.

#include <cstdint>
#include <vector>

#include "ratekit/bnn.hpp"
#include "ratekit/core.hpp"
#include "ratekit/simgen.hpp"

namespace ratekit {

struct RocCurve {
  std::vector<double> thresholds;  // +inf first, then distinct scores descending
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auc = 0.0;
};

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<bool>& mask);

struct DegradationCurve {
  std::vector<double> fractions;
  std::vector<double> mean_accuracy;
  std::vector<double> std_accuracy;  // sample std over repeats
  std::vector<std::vector<double>> accuracies;  // raw per-repeat values
};

// Grid {0, 0.05, ..., 0.5}.
std::vector<double> default_shuffle_fractions();

// For each fraction phi, independently permutes the rows of each of the top
// ceil(phi * p) ranked columns and records the network's test accuracy.
DegradationCurve shuffle_degradation(const Network& net, const Dataset& test,
                                     const std::vector<int>& ranking,
                                     const std::vector<double>& fractions, int repeats,
                                     std::uint64_t seed);

// Feature indices sorted by descending score (ties by index).
std::vector<int> ranking_from_scores(const std::vector<double>& scores);

std::vector<int> random_ranking(int p, std::uint64_t seed);

struct CorrelationResult {
  Vector corr;
  int zero_variance_columns = 0;
};

CorrelationResult marginal_correlation(const Matrix& x, const Vector& y);

struct TTestResult {
  Vector t;
  Vector pvalues;
  std::vector<bool> infinite_t;
};

// T_j = r_j sqrt((n-2)/(1-r_j^2)), two-sided p-values from Student-t(n-2).
TTestResult ttest_stats(const Matrix& x, const Vector& y);

// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ratekit
