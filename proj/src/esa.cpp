#include "ratekit/esa.hpp"

#include <random>

#include "ratekit/error.hpp"

namespace ratekit {

EffectSizePosterior covariance_esa(const Matrix& x, const LogitPosterior& lp,
                                   std::vector<std::string> feature_names) {
  if (x.rows() != lp.n()) throw InvalidInput("covariance_esa: X rows do not match the logit posterior");
  if (x.rows() < 2) throw InvalidInput("covariance_esa: insufficient data (n < 2)");
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != x.cols()) {
    throw InvalidInput("covariance_esa: feature name count does not match X");
  }
  // X^T C f == (C X)^T f, so centering X once covers every class.
  const Matrix xc_t = center_columns(x).transpose() / static_cast<double>(x.rows() - 1);

  EffectSizePosterior esa;
  esa.n_used = static_cast<std::size_t>(x.rows());
  esa.feature_names = std::move(feature_names);
  if (esa.feature_names.empty()) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) esa.feature_names.push_back("f" + std::to_string(j + 1));
  }
  for (int cls = 0; cls < lp.c(); ++cls) {
    esa.mu.push_back(xc_t * lp.mean.col(cls));
    esa.factor.push_back(xc_t * lp.factors.at(static_cast<std::size_t>(cls)));
  }
  return esa;
}

OlsEstimate ols_effect_size(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw InvalidInput("ols_effect_size: X rows and y disagree");
  if (x.rows() == 0) throw InvalidInput("ols_effect_size: empty design");
  Matrix design(x.rows(), x.cols() + 1);
  design << x, Vector::Ones(x.rows());
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  const Vector beta = cod.solve(y);
  OlsEstimate out;
  out.coef = beta.head(x.cols());
  out.intercept = beta(x.cols());
  out.rank_deficient = cod.rank() < design.cols();
  return out;
}

std::vector<int> effect_signs(const EffectSizePosterior& esa, int cls) {
  const Vector& mu = esa.mu.at(static_cast<std::size_t>(cls));
  std::vector<int> signs(static_cast<std::size_t>(mu.size()));
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    signs[static_cast<std::size_t>(j)] = (mu(j) > 0.0) - (mu(j) < 0.0);
  }
  return signs;
}

Matrix draw_effect_samples(const EffectSizePosterior& esa, int n_samples, std::uint64_t seed, int cls) {
  if (n_samples < 1) throw InvalidInput("draw_effect_samples: n_samples must be >= 1");
  const Vector& mu = esa.mu.at(static_cast<std::size_t>(cls));
  const Matrix& g = esa.factor.at(static_cast<std::size_t>(cls));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(g.cols(), n_samples);
  for (Eigen::Index s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, s) = normal(rng);
  }
  Matrix out = (g * z).transpose();
  out.rowwise() += mu.transpose();
  return out;
}

}  // namespace ratekit
