#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ratekit/core.hpp"

namespace ratekit {

struct Dataset {
  Matrix x;
  Vector y;
  std::optional<std::vector<bool>> causal_mask;
  std::vector<std::string> feature_names;

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }
  void validate() const;
  Dataset rows(const std::vector<Eigen::Index>& idx) const;
};

enum class FeatureBlock { causal, redundant, noise };

struct SynthSpec {
  int n = 1000;
  int p = 100;
  double frac_causal = 0.1;
  double frac_redundant = 0.0;
  int n_clusters_per_class = 2;
  int n_classes = 2;
  double class_sep = 1.0;
  double flip_y = 0.01;
  std::uint64_t seed = 0;

  int n_causal() const;
  int n_redundant() const;
  void validate() const;
};

struct SyntheticData {
  Dataset data;
  // block_of[j]: which block column j came from; source_index[j]: its position
  // in the unpermuted causal|redundant|noise layout.
  std::vector<FeatureBlock> block_of;
  std::vector<int> source_index;
};

// Gaussian clusters on hypercube vertices for the causal features, redundant
// features as random linear combinations of them, i.i.d. noise elsewhere,
// label flips, then a tracked column permutation.
SyntheticData synth_classification(const SynthSpec& spec);

// x1 ~ N(0,1), x2 = rho x1 + sqrt(1-rho^2) e2, y = 2 x1 - 2 x2 + e.
Dataset collinear_regression(int n, double rho, std::uint64_t seed);

// Deterministic train/test row split.
struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};
Split train_test_split(Eigen::Index n, double test_fraction, std::uint64_t seed);

}  // namespace ratekit
