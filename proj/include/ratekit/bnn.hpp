#pragma once

// Feed-forward network with point-estimate ReLU hidden layers and a mean-field
// Gaussian output layer, trained by minimizing the negative ELBO.

#include <cstdint>
#include <string>
#include <vector>

#include "ratekit/core.hpp"

namespace ratekit {

enum class Link { sigmoid, identity, softmax };

std::string to_string(Link link);
Link link_from_string(const std::string& name);

struct NetworkConfig {
  int input_dim = 0;
  std::vector<int> hidden_sizes{512, 512};
  Link link = Link::sigmoid;
  int n_classes = 1;          // output nodes; 1 for binary and regression
  double prior_scale = 1.0;   // prior N(0, s^2 I) on output weights
  double noise_variance = 1.0;  // Gaussian likelihood, identity link only

  int last_hidden() const { return hidden_sizes.empty() ? 0 : hidden_sizes.back(); }
  void validate() const;
};

struct DenseLayer {
  Matrix weight;  // fan_in x fan_out
  Vector bias;
};

struct Network {
  NetworkConfig config;
  std::uint64_t seed = 0;
  std::vector<DenseLayer> hidden;
  Matrix mean;      // k x c variational means
  Matrix log_var;   // k x c, v = exp(log_var)
  Vector out_bias;  // c

  int k() const { return static_cast<int>(mean.rows()); }
  int c() const { return static_cast<int>(mean.cols()); }
  Matrix variance() const { return log_var.array().exp().matrix(); }
  std::size_t parameter_count() const;
};

enum class KlScale {
  batch_fraction,  // KL * batch_size / n_total
  full,            // KL added whole to every batch
  none,            // maximum-likelihood output layer (debugging only)
};

std::string to_string(KlScale mode);
KlScale kl_scale_from_string(const std::string& name);

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 1e-3;
  int patience = 2;
  int batch_size = 32;
  int mc_samples = 1;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  KlScale kl_scale_mode = KlScale::batch_fraction;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // negative ELBO per training example
  double metric = 0.0;      // early-stopping metric (accuracy, or MSE)
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::string metric_name;
  int best_epoch = 0;
  bool stopped_early = false;
};

struct TrainResult {
  Network network;
  TrainHistory history;
};

// Gaussian over the logits f: per class, mean H m_c + b_c and covariance F_c F_c^T.
struct LogitPosterior {
  Matrix mean;                  // n x c
  std::vector<Matrix> factors;  // per class, n x k
  Matrix activations;           // H, n x k
  Vector bias;

  Eigen::Index n() const { return mean.rows(); }
  int c() const { return static_cast<int>(mean.cols()); }

  // Degenerate posterior concentrated at the given single-class logits.
  static LogitPosterior deterministic(const Vector& logits);
};

// Gradient of a loss with respect to every network parameter, same layout as Network.
struct NetworkGradient {
  std::vector<DenseLayer> hidden;
  Matrix mean;
  Matrix log_var;
  Vector out_bias;
};

Network build_network(const NetworkConfig& config, std::uint64_t seed);

Matrix penultimate_activations(const Network& net, const Matrix& x);

// KL(N(m, diag v) || N(0, s^2 I)).
double kl_q_prior(const Matrix& m, const Matrix& v, double prior_scale);

// Negative minibatch ELBO using the local reparameterization trick. Labels are
// {0,1} for sigmoid, class indices for softmax, reals for identity.
double elbo_loss(const Network& net, const Matrix& x_batch, const Vector& y_batch,
                 std::size_t n_total, int mc_samples, std::uint64_t seed,
                 KlScale kl_mode = KlScale::batch_fraction);

// Same loss plus its exact gradient for the sampled noise.
double elbo_loss_and_gradient(const Network& net, const Matrix& x_batch, const Vector& y_batch,
                              std::size_t n_total, int mc_samples, std::uint64_t seed,
                              KlScale kl_mode, NetworkGradient& grad);

TrainResult train(Network net, const Matrix& x, const Vector& y, const TrainConfig& config);

LogitPosterior logit_posterior(const Network& net, const Matrix& x);

// Link applied to posterior-mean logits; n x 1 for sigmoid, n x c for softmax.
Matrix predict_proba(const Network& net, const Matrix& x);

// Hard labels from predict_proba (0/1 for sigmoid, argmax for softmax).
Vector predict_labels(const Network& net, const Matrix& x);

double accuracy(const Network& net, const Matrix& x, const Vector& y);

// Flattened parameter view used by the optimizer and the finite-difference checks.
std::vector<double> flatten(const Network& net);
void unflatten(Network& net, const std::vector<double>& params);
std::vector<double> flatten(const NetworkGradient& grad);

}  // namespace ratekit
