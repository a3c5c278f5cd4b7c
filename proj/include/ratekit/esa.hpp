#pragma once

// Effect size analogues: projects the logit posterior onto the input features
// through their sample covariance.

#include <cstdint>
#include <string>
#include <vector>

#include "ratekit/bnn.hpp"
#include "ratekit/core.hpp"

namespace ratekit {

// Per output class c, beta_c ~ N(mu[c], factor[c] * factor[c]^T).
struct EffectSizePosterior {
  std::vector<Vector> mu;
  std::vector<Matrix> factor;  // p x k
  std::size_t n_used = 0;
  std::vector<std::string> feature_names;

  int p() const { return mu.empty() ? 0 : static_cast<int>(mu.front().size()); }
  int c() const { return static_cast<int>(mu.size()); }
};

// mu = X^T C mean / (n-1), G = X^T C F / (n-1).
EffectSizePosterior covariance_esa(const Matrix& x, const LogitPosterior& lp,
                                   std::vector<std::string> feature_names = {});

struct OlsEstimate {
  Vector coef;  // p slopes, intercept excluded
  double intercept = 0.0;
  bool rank_deficient = false;
};

// Minimum-norm least squares with an intercept column appended.
OlsEstimate ols_effect_size(const Matrix& x, const Vector& y);

// Sign of mu for one class; exact zeros map to 0.
std::vector<int> effect_signs(const EffectSizePosterior& esa, int cls = 0);

// n_samples x p draws of mu + G z for one class.
Matrix draw_effect_samples(const EffectSizePosterior& esa, int n_samples, std::uint64_t seed,
                           int cls = 0);

}  // namespace ratekit
