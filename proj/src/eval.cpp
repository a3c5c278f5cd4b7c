#include "ratekit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ratekit/error.hpp"
#include "ratekit/stats.hpp"

namespace ratekit {

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<bool>& mask) {
  if (scores.size() != mask.size()) throw InvalidInput("roc_auc: scores and mask lengths differ");
  const auto positives = static_cast<double>(std::count(mask.begin(), mask.end(), true));
  const double negatives = static_cast<double>(mask.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) throw InvalidInput("roc_auc: degenerate mask (one class only)");
  for (double s : scores) {
    if (std::isnan(s)) throw InvalidInput("roc_auc: NaN score");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.thresholds.push_back(std::numeric_limits<double>::infinity());
  roc.fpr.push_back(0.0);
  roc.tpr.push_back(0.0);
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    // Equal scores form one threshold.
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      (mask[order[i]] ? tp : fp) += 1.0;
    }
    roc.thresholds.push_back(threshold);
    roc.fpr.push_back(fp / negatives);
    roc.tpr.push_back(tp / positives);
  }
  for (std::size_t i = 1; i < roc.fpr.size(); ++i) {
    roc.auc += (roc.fpr[i] - roc.fpr[i - 1]) * (roc.tpr[i] + roc.tpr[i - 1]) * 0.5;
  }
  return roc;
}

std::vector<double> default_shuffle_fractions() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(0.05 * i);
  return grid;
}

std::vector<int> ranking_from_scores(const std::vector<double>& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  return order;
}

std::vector<int> random_ranking(int p, std::uint64_t seed) {
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

DegradationCurve shuffle_degradation(const Network& net, const Dataset& test,
                                     const std::vector<int>& ranking,
                                     const std::vector<double>& fractions, int repeats,
                                     std::uint64_t seed) {
  if (test.n() == 0) throw InvalidInput("shuffle_degradation: empty test set");
  if (repeats < 1) throw InvalidInput("shuffle_degradation: repeats must be >= 1");
  if (net.config.link == Link::identity) throw InvalidInput("shuffle_degradation: needs a classification network");
  const auto p = static_cast<int>(test.p());
  {
    std::vector<int> sorted = ranking;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(static_cast<std::size_t>(p));
    std::iota(expected.begin(), expected.end(), 0);
    if (sorted != expected) throw InvalidInput("shuffle_degradation: ranking is not a permutation of the features");
  }

  DegradationCurve curve;
  const double baseline = accuracy(net, test.x, test.y);
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    const double phi = fractions[fi];
    if (!(phi >= 0.0 && phi <= 1.0)) throw InvalidInput("shuffle_degradation: fraction outside [0, 1]");
    const auto count = static_cast<int>(std::ceil(phi * p - 1e-9));
    std::vector<double> acc(static_cast<std::size_t>(repeats), baseline);
    if (count > 0) {
      parallel_for(static_cast<std::size_t>(repeats), [&](std::size_t r) {
        std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(fi),
                          static_cast<std::uint64_t>(r)};
        std::mt19937_64 rng(seq);
        Matrix x = test.x;
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(test.n()));
        for (int c = 0; c < count; ++c) {
          const int col = ranking[static_cast<std::size_t>(c)];
          std::iota(perm.begin(), perm.end(), 0);
          std::shuffle(perm.begin(), perm.end(), rng);
          const Vector shuffled = test.x.col(col)(perm);
          x.col(col) = shuffled;
        }
        acc[r] = accuracy(net, x, test.y);
      });
    }
    const double mean = std::accumulate(acc.begin(), acc.end(), 0.0) / repeats;
    double var = 0.0;
    if (repeats > 1) {
      for (double a : acc) var += (a - mean) * (a - mean);
      var /= repeats - 1;
    }
    curve.fractions.push_back(phi);
    curve.mean_accuracy.push_back(mean);
    curve.std_accuracy.push_back(std::sqrt(var));
    curve.accuracies.push_back(std::move(acc));
  }
  return curve;
}

CorrelationResult marginal_correlation(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw InvalidInput("marginal_correlation: X rows and y disagree");
  if (x.rows() < 3) throw InvalidInput("marginal_correlation: need n >= 3");
  const Matrix xc = center_columns(x);
  const Vector yc = y.array() - y.mean();
  const double y_ss = yc.squaredNorm();
  CorrelationResult out;
  out.corr = Vector::Zero(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double x_ss = xc.col(j).squaredNorm();
    if (x_ss == 0.0 || y_ss == 0.0) {
      ++out.zero_variance_columns;
      continue;
    }
    out.corr(j) = std::clamp(xc.col(j).dot(yc) / std::sqrt(x_ss * y_ss), -1.0, 1.0);
  }
  return out;
}

TTestResult ttest_stats(const Matrix& x, const Vector& y) {
  if (x.rows() <= 2) throw InvalidInput("ttest_stats: need n > 2");
  const Vector r = marginal_correlation(x, y).corr;
  const double df = static_cast<double>(x.rows() - 2);
  TTestResult out;
  out.t.resize(r.size());
  out.pvalues.resize(r.size());
  out.infinite_t.assign(static_cast<std::size_t>(r.size()), false);
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    const double rho = r(j);
    if (std::abs(rho) >= 1.0) {
      out.t(j) = std::copysign(std::numeric_limits<double>::infinity(), rho);
      out.pvalues(j) = 0.0;
      out.infinite_t[static_cast<std::size_t>(j)] = true;
      continue;
    }
    out.t(j) = rho * std::sqrt(df / (1.0 - rho * rho));
    out.pvalues(j) = stats::student_t_two_sided_p(out.t(j), df);
  }
  return out;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j - 1);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidInput("spearman: need two equal-length vectors");
  const std::vector<double> ra = average_ranks(a), rb = average_ranks(b);
  const Eigen::Map<const Vector> va(ra.data(), static_cast<Eigen::Index>(ra.size()));
  const Eigen::Map<const Vector> vb(rb.data(), static_cast<Eigen::Index>(rb.size()));
  const Vector ca = va.array() - va.mean();
  const Vector cb = vb.array() - vb.mean();
  return ca.dot(cb) / (ca.norm() * cb.norm());
}

}  // namespace ratekit
