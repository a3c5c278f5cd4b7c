#pragma once

// Relative centrality (RATE) scores for individual features and feature groups.
//
// For beta ~ N(mu, Omega) with Lambda = Omega^{-1}, the centrality of feature j
// is the KL divergence between the marginal of beta_{-j} and its conditional
// given beta_j = 0:
//
//   KLD_j = 1/2 [ tr(Omega_{-j} Lambda_{-j}) - ln|Omega_{-j} Lambda_{-j}| - (p-1) + delta_j mu_j^2 ]
//   delta_j = lambda_{-j}^T Lambda_{-j}^{-1} lambda_{-j}
//
// With Lambda the exact inverse of Omega, the block-inverse identities give
//
//   tr(Omega_{-j} Lambda_{-j}) = p - 2 + omega_j lambda_j
//   |Omega_{-j} Lambda_{-j}|    = omega_j lambda_j
//   delta_j                    = lambda_j - 1 / omega_j
//
// so the fast path needs only the diagonals of Omega and Lambda. The naive path
// evaluates the submatrix expression literally and is kept as a reference.

#include <optional>
#include <string>
#include <vector>

#include "ratekit/core.hpp"
#include "ratekit/esa.hpp"

namespace ratekit {

struct PrecisionModel {
  Vector mu;
  Matrix omega;   // Omega + jitter * I
  Matrix lambda;  // inverse of omega
  double jitter = 0.0;
  double log_det_omega = 0.0;

  int p() const { return static_cast<int>(mu.size()); }
};

enum class KldPath { naive, fast };

std::string to_string(KldPath path);
KldPath kld_path_from_string(const std::string& name);

struct GroupMap {
  std::vector<std::string> names;
  std::vector<std::vector<int>> members;

  std::size_t size() const { return names.size(); }
  void add(std::string name, std::vector<int> indices);
  // Throws InvalidInput for empty groups, out-of-range indices, or groups
  // covering every feature.
  void validate(int p) const;
  bool has_overlap() const;

  // One group per feature.
  static GroupMap singletons(int p, const std::vector<std::string>& feature_names = {});
};

struct ImportanceItem {
  std::string name;
  std::vector<int> members;  // groups only
  double kld = 0.0;
  double rate = 0.0;
  int sign = 0;
  std::optional<double> mi;  // features only
  bool significant = false;
};

struct ImportanceReport {
  int cls = 0;
  bool is_group = false;
  bool degenerate = false;  // every KLD was zero; rates set uniform
  std::vector<ImportanceItem> items;
  std::vector<std::string> warnings;

  std::vector<double> rates() const;
};

PrecisionModel build_precision(const Vector& mu, const Matrix& factor, double base_jitter = kDefaultJitter);
PrecisionModel build_precision(const EffectSizePosterior& esa, int cls = 0,
                               double base_jitter = kDefaultJitter);
// Same as build_precision but starting from a materialized covariance.
PrecisionModel precision_from_covariance(const Vector& mu, const Matrix& omega,
                                         double base_jitter = kDefaultJitter);

double kld_variable_naive(const PrecisionModel& pm, int j);
double kld_variable_fast(const PrecisionModel& pm, int j);

// KLD for a feature group, evaluated literally on the complement submatrices.
double kld_group(const PrecisionModel& pm, const std::vector<int>& group);
// Same quantity via the m x m blocks: 1/2 [tr(A) - m - ln|A| + mu_J^T (Lambda_J - Omega_J^{-1}) mu_J]
// with A = Omega_J Lambda_J.
double kld_group_fast(const PrecisionModel& pm, const std::vector<int>& group);

// 1/2 ln(omega_j lambda_j).
double mutual_info(const PrecisionModel& pm, int j);

ImportanceReport rate_scores(const PrecisionModel& pm, KldPath path = KldPath::fast,
                             const std::vector<std::string>& feature_names = {});

ImportanceReport group_rate(const PrecisionModel& pm, const GroupMap& groups,
                            KldPath path = KldPath::fast);

}  // namespace ratekit
