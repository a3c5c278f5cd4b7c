#pragma once
// Reference computations used by the unit and acceptance tests. Each one is
// written from first principles, without calling into the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline std::vector<int> others(int p, const std::vector<int>& group) {
  std::vector<int> out;
  for (int i = 0; i < p; ++i) {
    if (std::find(group.begin(), group.end(), i) == group.end()) out.push_back(i);
  }
  return out;
}

// KL( N(marginal of beta_{-J}) || N(beta_{-J} | beta_J = 0) ) for beta ~ N(mu, omega),
// from the textbook conditional-Gaussian formulas and the closed-form Gaussian KL.
inline double conditional_kl(const Vector& mu, const Matrix& omega, const std::vector<int>& group) {
  const std::vector<int> rest = others(static_cast<int>(mu.size()), group);
  const Matrix s_rr = omega(rest, rest);
  const Matrix s_rg = omega(rest, group);
  const Matrix s_gg = omega(group, group);
  const Vector mu_r = mu(rest);
  const Vector mu_g = mu(group);

  const Eigen::FullPivLU<Matrix> gg(s_gg);
  const Vector cond_mean = mu_r - s_rg * gg.solve(mu_g);
  const Matrix cond_cov = s_rr - s_rg * gg.solve(s_rg.transpose());

  const Eigen::FullPivLU<Matrix> cc(cond_cov);
  const Vector diff = cond_mean - mu_r;
  const double k = static_cast<double>(rest.size());
  const double trace = cc.solve(s_rr).trace();
  const double quad = diff.dot(cc.solve(diff));
  const double log_ratio = std::log(cc.determinant()) - std::log(Eigen::FullPivLU<Matrix>(s_rr).determinant());
  return 0.5 * (trace + quad - k + log_ratio);
}

struct GaussianModel {
  Vector mu;
  Matrix omega;
};

// Random well-conditioned SPD covariance with a random mean.
inline GaussianModel random_model(int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Matrix a(p, p + 5);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
  GaussianModel m;
  m.omega = a * a.transpose() / static_cast<double>(p + 5);
  m.omega.diagonal().array() += 0.05;
  m.omega = 0.5 * (m.omega + m.omega.transpose());
  m.mu.resize(p);
  for (int i = 0; i < p; ++i) m.mu(i) = z(rng);
  return m;
}

// Average ranks (1-based), ties share their mean rank.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

// Mann-Whitney form of the ROC AUC: P(score_pos > score_neg) + 0.5 P(tie).
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& mask) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!mask[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (mask[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Pearson correlation of each column with y, by explicit sums.
inline std::vector<double> pearson_columns(const Matrix& x, const Vector& y) {
  const double n = static_cast<double>(x.rows());
  const double ym = y.sum() / n;
  std::vector<double> out;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double xm = x.col(j).sum() / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double dx = x(i, j) - xm;
      const double dy = y(i) - ym;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
    out.push_back(sxy / std::sqrt(sxx * syy));
  }
  return out;
}

}  // namespace oracle
