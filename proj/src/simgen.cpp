#include "ratekit/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "ratekit/error.hpp"

namespace ratekit {

void Dataset::validate() const {
  if (x.rows() != y.size()) throw InvalidInput("dataset: feature rows and labels disagree");
  if (causal_mask && static_cast<Eigen::Index>(causal_mask->size()) != x.cols()) {
    throw InvalidInput("dataset: causal mask length does not match feature count");
  }
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != x.cols()) {
    throw InvalidInput("dataset: feature name count does not match feature count");
  }
  if (!x.allFinite() || !y.allFinite()) throw InvalidInput("dataset: non-finite value");
}

Dataset Dataset::rows(const std::vector<Eigen::Index>& idx) const {
  Dataset out;
  out.x = x(idx, Eigen::all);
  out.y = y(idx);
  out.causal_mask = causal_mask;
  out.feature_names = feature_names;
  return out;
}

int SynthSpec::n_causal() const { return static_cast<int>(std::lround(frac_causal * p)); }
int SynthSpec::n_redundant() const { return static_cast<int>(std::lround(frac_redundant * p)); }

void SynthSpec::validate() const {
  if (n < 10) throw InvalidInput("synth spec: n must be >= 10");
  if (p < 1) throw InvalidInput("synth spec: p must be >= 1");
  if (frac_causal < 0.0 || frac_redundant < 0.0 || frac_causal + frac_redundant > 1.0 + 1e-12) {
    throw InvalidInput("synth spec: fractions must be non-negative and sum to <= 1");
  }
  if (n_causal() < 1) throw InvalidInput("synth spec: resulting causal count is zero");
  if (n_causal() + n_redundant() > p) throw InvalidInput("synth spec: causal + redundant exceeds p");
  if (n_classes < 2) throw InvalidInput("synth spec: need at least two classes");
  if (n_clusters_per_class < 1) throw InvalidInput("synth spec: need at least one cluster per class");
  const int clusters = n_classes * n_clusters_per_class;
  if (n_causal() < 31 && clusters > (1 << n_causal())) {
    throw InvalidInput("synth spec: n_classes * n_clusters_per_class exceeds 2^n_causal");
  }
  if (n < clusters) throw InvalidInput("synth spec: fewer rows than clusters");
  if (!(class_sep >= 0.0)) throw InvalidInput("synth spec: class_sep must be >= 0");
  if (!(flip_y >= 0.0 && flip_y <= 1.0)) throw InvalidInput("synth spec: flip_y must be in [0, 1]");
}

SyntheticData synth_classification(const SynthSpec& spec) {
  spec.validate();
  const int n_inf = spec.n_causal();
  const int n_red = spec.n_redundant();
  const int n_noise = spec.p - n_inf - n_red;
  const int clusters = spec.n_classes * spec.n_clusters_per_class;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  // Distinct hypercube vertices, one per cluster.
  std::set<std::vector<bool>> used;
  std::vector<Vector> centroids;
  while (static_cast<int>(centroids.size()) < clusters) {
    std::vector<bool> bits(static_cast<std::size_t>(n_inf));
    for (auto&& b : bits) b = coin(rng);
    if (!used.insert(bits).second) continue;
    Vector c(n_inf);
    for (int i = 0; i < n_inf; ++i) c(i) = bits[static_cast<std::size_t>(i)] ? spec.class_sep : -spec.class_sep;
    centroids.push_back(std::move(c));
  }

  Matrix informative(spec.n, n_inf);
  Vector y(spec.n);
  const int per_cluster = spec.n / clusters;
  int row = 0;
  for (int k = 0; k < clusters; ++k) {
    const int count = per_cluster + (k < spec.n % clusters ? 1 : 0);
    Matrix mixing(n_inf, n_inf);
    for (Eigen::Index j = 0; j < mixing.cols(); ++j) {
      for (Eigen::Index i = 0; i < mixing.rows(); ++i) mixing(i, j) = unit(rng);
    }
    Matrix block(count, n_inf);
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
      for (Eigen::Index i = 0; i < block.rows(); ++i) block(i, j) = normal(rng);
    }
    block = block * mixing;
    block.rowwise() += centroids[static_cast<std::size_t>(k)].transpose();
    informative.middleRows(row, count) = block;
    y.segment(row, count).setConstant(static_cast<double>(k % spec.n_classes));
    row += count;
  }

  Matrix redundant(spec.n, n_red);
  if (n_red > 0) {
    Matrix combo(n_inf, n_red);
    for (Eigen::Index j = 0; j < combo.cols(); ++j) {
      for (Eigen::Index i = 0; i < combo.rows(); ++i) combo(i, j) = unit(rng);
    }
    redundant = informative * combo;
  }

  Matrix noise(spec.n, n_noise);
  for (Eigen::Index j = 0; j < noise.cols(); ++j) {
    for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, j) = normal(rng);
  }

  // Flip labels to a different class.
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> other(1, spec.n_classes - 1);
  for (int i = 0; i < spec.n; ++i) {
    if (u01(rng) < spec.flip_y) {
      y(i) = static_cast<double>((static_cast<int>(y(i)) + other(rng)) % spec.n_classes);
    }
  }

  Matrix ordered(spec.n, spec.p);
  ordered << informative, redundant, noise;

  std::vector<Eigen::Index> row_perm(static_cast<std::size_t>(spec.n));
  std::iota(row_perm.begin(), row_perm.end(), 0);
  std::shuffle(row_perm.begin(), row_perm.end(), rng);
  std::vector<int> col_perm(static_cast<std::size_t>(spec.p));
  std::iota(col_perm.begin(), col_perm.end(), 0);
  std::shuffle(col_perm.begin(), col_perm.end(), rng);

  SyntheticData out;
  out.data.x = ordered(row_perm, col_perm);
  out.data.y = y(row_perm);
  out.data.causal_mask = std::vector<bool>(static_cast<std::size_t>(spec.p));
  out.source_index = col_perm;
  for (int j = 0; j < spec.p; ++j) {
    const int src = col_perm[static_cast<std::size_t>(j)];
    const FeatureBlock block = src < n_inf ? FeatureBlock::causal
                               : src < n_inf + n_red ? FeatureBlock::redundant
                                                     : FeatureBlock::noise;
    out.block_of.push_back(block);
    (*out.data.causal_mask)[static_cast<std::size_t>(j)] = block == FeatureBlock::causal;
    out.data.feature_names.push_back("f" + std::to_string(j + 1));
  }
  return out;
}

Dataset collinear_regression(int n, double rho, std::uint64_t seed) {
  if (n < 2) throw InvalidInput("collinear_regression: n must be >= 2");
  if (!(std::abs(rho) < 1.0)) throw InvalidInput("collinear_regression: |rho| must be < 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double resid = std::sqrt(1.0 - rho * rho);
  Dataset d;
  d.x.resize(n, 2);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x1 = normal(rng);
    const double x2 = rho * x1 + resid * normal(rng);
    d.x(i, 0) = x1;
    d.x(i, 1) = x2;
    d.y(i) = 2.0 * x1 - 2.0 * x2 + normal(rng);
  }
  d.causal_mask = std::vector<bool>{true, true};
  d.feature_names = {"x1", "x2"};
  return d;
}

Split train_test_split(Eigen::Index n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidInput("train_test_split: test_fraction must be in (0, 1)");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n_test < 2 || n_test >= order.size()) throw InvalidInput("train_test_split: split leaves a side too small");
  Split s;
  s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

}  // namespace ratekit
