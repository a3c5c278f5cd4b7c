#include "ratekit/bnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ratekit/error.hpp"

namespace ratekit {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double softplus(double f) { return std::max(f, 0.0) + std::log1p(std::exp(-std::abs(f))); }

double sigmoid(double f) {
  if (f >= 0.0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

void check_labels(const NetworkConfig& cfg, const Vector& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double v = y(i);
    if (!std::isfinite(v)) throw InvalidInput("label/link mismatch: non-finite label");
    switch (cfg.link) {
      case Link::sigmoid:
        if (v != 0.0 && v != 1.0) throw InvalidInput("label/link mismatch: sigmoid link needs 0/1 labels");
        break;
      case Link::softmax:
        if (v != std::floor(v) || v < 0.0 || v >= cfg.n_classes) {
          throw InvalidInput("label/link mismatch: softmax link needs class indices in [0, c)");
        }
        break;
      case Link::identity:
        break;
    }
  }
}

void check_input(const Network& net, const Matrix& x) {
  if (x.cols() != net.config.input_dim) {
    throw InvalidInput("dimension mismatch: network expects " + std::to_string(net.config.input_dim) +
                       " features, got " + std::to_string(x.cols()));
  }
}

struct Forward {
  std::vector<Matrix> acts;  // acts[0] = input, acts[l+1] = relu(pre[l])
  std::vector<Matrix> pre;
};

Forward forward(const Network& net, const Matrix& x) {
  Forward fw;
  fw.acts.reserve(net.hidden.size() + 1);
  fw.pre.reserve(net.hidden.size());
  fw.acts.push_back(x);
  for (const auto& layer : net.hidden) {
    Matrix z = fw.acts.back() * layer.weight;
    z.rowwise() += layer.bias.transpose();
    fw.acts.push_back(z.cwiseMax(0.0));
    fw.pre.push_back(std::move(z));
  }
  return fw;
}

double kl_weight(KlScale mode, std::size_t batch, std::size_t n_total) {
  switch (mode) {
    case KlScale::batch_fraction:
      return static_cast<double>(batch) / static_cast<double>(n_total);
    case KlScale::full:
      return 1.0;
    case KlScale::none:
      return 0.0;
  }
  return 1.0;
}

// Loss for one row of sampled logits; writes dLoss/df into grad.
double row_nll(const NetworkConfig& cfg, const Eigen::Ref<const Eigen::RowVectorXd>& f, double y,
               Eigen::Ref<Eigen::RowVectorXd> grad) {
  switch (cfg.link) {
    case Link::sigmoid: {
      grad(0) = sigmoid(f(0)) - y;
      return softplus(f(0)) - y * f(0);
    }
    case Link::softmax: {
      const double top = f.maxCoeff();
      const Eigen::RowVectorXd e = (f.array() - top).exp();
      const double total = e.sum();
      const auto label = static_cast<Eigen::Index>(y);
      grad = e / total;
      grad(label) -= 1.0;
      return top + std::log(total) - f(label);
    }
    case Link::identity: {
      const double s2 = cfg.noise_variance;
      const double r = f(0) - y;
      grad(0) = r / s2;
      return 0.5 * r * r / s2 + 0.5 * (kLog2Pi + std::log(s2));
    }
  }
  return 0.0;
}

double loss_impl(const Network& net, const Matrix& x, const Vector& y, std::size_t n_total,
                 int mc_samples, std::uint64_t seed, KlScale kl_mode, NetworkGradient* grad) {
  check_input(net, x);
  if (x.rows() != y.size()) throw InvalidInput("elbo_loss: batch rows and labels disagree");
  if (x.rows() == 0) throw InvalidInput("elbo_loss: empty batch");
  if (mc_samples < 1) throw InvalidInput("elbo_loss: mc_samples must be >= 1");
  if (n_total < static_cast<std::size_t>(x.rows())) throw InvalidInput("elbo_loss: n_total < batch size");
  check_labels(net.config, y);

  const auto& cfg = net.config;
  const Forward fw = forward(net, x);
  const Matrix& h = fw.acts.back();
  const Matrix v = net.variance();
  const Matrix h2 = h.array().square().matrix();

  Matrix mu = h * net.mean;
  mu.rowwise() += net.out_bias.transpose();
  const Matrix sd = (h2 * v).array().sqrt().matrix();

  const auto batch = x.rows();
  const auto c = net.c();
  Matrix g_mu = Matrix::Zero(batch, c);
  Matrix g_sd = Matrix::Zero(batch, c);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix eps(batch, c);
  Eigen::RowVectorXd f(c), g(c);
  double nll = 0.0;
  for (int s = 0; s < mc_samples; ++s) {
    for (Eigen::Index i = 0; i < batch; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) eps(i, j) = normal(rng);
    }
    for (Eigen::Index i = 0; i < batch; ++i) {
      f = mu.row(i) + sd.row(i).cwiseProduct(eps.row(i));
      nll += row_nll(cfg, f, y(i), g);
      g_mu.row(i) += g;
      g_sd.row(i) += g.cwiseProduct(eps.row(i));
    }
  }
  const double inv_s = 1.0 / mc_samples;
  nll *= inv_s;

  const double kw = kl_weight(kl_mode, static_cast<std::size_t>(batch), n_total);
  const double kl = kw > 0.0 ? kl_q_prior(net.mean, v, cfg.prior_scale) : 0.0;
  const double loss = kw * kl + nll;
  if (grad == nullptr) return loss;

  g_mu *= inv_s;
  g_sd *= inv_s;
  // r = dL/dsd / (2 sd); zero where sd vanishes (all activations zero in that row).
  Matrix r = Matrix::Zero(batch, c);
  for (Eigen::Index i = 0; i < batch; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      if (sd(i, j) > 0.0) r(i, j) = g_sd(i, j) / (2.0 * sd(i, j));
    }
  }

  const double s2 = cfg.prior_scale * cfg.prior_scale;
  grad->mean = h.transpose() * g_mu + kw * net.mean / s2;
  grad->out_bias = g_mu.colwise().sum().transpose();
  const Matrix dv = h2.transpose() * r;
  grad->log_var = dv.cwiseProduct(v) + kw * 0.5 * (v.array() / s2 - 1.0).matrix();

  Matrix d_act = g_mu * net.mean.transpose() + 2.0 * h.cwiseProduct(r * v.transpose());
  grad->hidden.resize(net.hidden.size());
  for (std::size_t l = net.hidden.size(); l-- > 0;) {
    const Matrix d_pre = d_act.cwiseProduct((fw.pre[l].array() > 0.0).cast<double>().matrix());
    grad->hidden[l].weight = fw.acts[l].transpose() * d_pre;
    grad->hidden[l].bias = d_pre.colwise().sum().transpose();
    if (l > 0) d_act = d_pre * net.hidden[l].weight.transpose();
  }
  return loss;
}

// Early-stopping metric; higher is better when `higher_better`.
struct Metric {
  std::string name;
  bool higher_better;
};

Metric metric_for(const NetworkConfig& cfg, bool has_validation) {
  if (!has_validation) return {"train_mse", false};
  if (cfg.link == Link::identity) return {"val_mse", false};
  return {"val_accuracy", true};
}

double mse(const Network& net, const Matrix& x, const Vector& y) {
  if (net.config.link == Link::identity) {
    const LogitPosterior lp = logit_posterior(net, x);
    return (lp.mean.col(0) - y).squaredNorm() / static_cast<double>(y.size());
  }
  const Matrix prob = predict_proba(net, x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < prob.rows(); ++i) {
    if (net.config.link == Link::sigmoid) {
      total += (prob(i, 0) - y(i)) * (prob(i, 0) - y(i));
    } else {
      for (Eigen::Index j = 0; j < prob.cols(); ++j) {
        const double target = static_cast<Eigen::Index>(y(i)) == j ? 1.0 : 0.0;
        total += (prob(i, j) - target) * (prob(i, j) - target);
      }
    }
  }
  return total / static_cast<double>(prob.rows());
}

}  // namespace

std::string to_string(Link link) {
  switch (link) {
    case Link::sigmoid: return "sigmoid";
    case Link::identity: return "identity";
    case Link::softmax: return "softmax";
  }
  return "unknown";
}

Link link_from_string(const std::string& name) {
  if (name == "sigmoid") return Link::sigmoid;
  if (name == "identity") return Link::identity;
  if (name == "softmax") return Link::softmax;
  throw InvalidInput("unknown link '" + name + "' (expected sigmoid, identity or softmax)");
}

std::string to_string(KlScale mode) {
  switch (mode) {
    case KlScale::batch_fraction: return "batch_fraction";
    case KlScale::full: return "full";
    case KlScale::none: return "none";
  }
  return "unknown";
}

KlScale kl_scale_from_string(const std::string& name) {
  if (name == "batch_fraction") return KlScale::batch_fraction;
  if (name == "full") return KlScale::full;
  if (name == "none") return KlScale::none;
  throw InvalidInput("unknown kl_scale_mode '" + name + "'");
}

void NetworkConfig::validate() const {
  if (input_dim < 1) throw InvalidInput("network config: input_dim must be >= 1");
  if (hidden_sizes.empty()) throw InvalidInput("network config: at least one hidden layer required");
  for (int h : hidden_sizes) {
    if (h < 1) throw InvalidInput("network config: zero-width hidden layer");
  }
  if (!(prior_scale > 0.0)) throw InvalidInput("network config: prior_scale must be > 0");
  if (!(noise_variance > 0.0)) throw InvalidInput("network config: noise_variance must be > 0");
  switch (link) {
    case Link::sigmoid:
    case Link::identity:
      if (n_classes != 1) throw InvalidInput("network config: sigmoid/identity links need n_classes = 1");
      break;
    case Link::softmax:
      if (n_classes < 2) throw InvalidInput("network config: softmax link needs n_classes >= 2");
      break;
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidInput("train config: epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidInput("train config: learning_rate must be > 0");
  if (patience < 0) throw InvalidInput("train config: patience must be >= 0");
  if (batch_size < 1) throw InvalidInput("train config: batch_size must be >= 1");
  if (mc_samples < 1) throw InvalidInput("train config: mc_samples must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw InvalidInput("train config: val_fraction must be in [0, 1)");
  }
}

std::size_t Network::parameter_count() const {
  std::size_t total = 0;
  for (const auto& l : hidden) total += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return total + static_cast<std::size_t>(mean.size() + log_var.size() + out_bias.size());
}

LogitPosterior LogitPosterior::deterministic(const Vector& logits) {
  LogitPosterior lp;
  lp.mean = logits;
  lp.activations = Matrix::Zero(logits.size(), 1);
  lp.factors.push_back(Matrix::Zero(logits.size(), 1));
  lp.bias = Vector::Zero(1);
  return lp;
}

Network build_network(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Network net;
  net.config = config;
  net.seed = seed;
  std::mt19937_64 rng(seed);

  int fan_in = config.input_dim;
  for (int width : config.hidden_sizes) {
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> uniform(-limit, limit);
    DenseLayer layer{Matrix(fan_in, width), Vector::Zero(width)};
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = uniform(rng);
    }
    net.hidden.push_back(std::move(layer));
    fan_in = width;
  }

  const int k = config.last_hidden();
  const int c = config.n_classes;
  std::normal_distribution<double> normal(0.0, 0.05);
  net.mean.resize(k, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) net.mean(i, j) = normal(rng);
  }
  net.log_var = Matrix::Constant(k, c, -5.0);
  net.out_bias = Vector::Zero(c);
  return net;
}

Matrix penultimate_activations(const Network& net, const Matrix& x) {
  check_input(net, x);
  Matrix a = x;
  for (const auto& layer : net.hidden) {
    Matrix z = a * layer.weight;
    z.rowwise() += layer.bias.transpose();
    a = z.cwiseMax(0.0);
  }
  return a;
}

double kl_q_prior(const Matrix& m, const Matrix& v, double prior_scale) {
  if (!(prior_scale > 0.0)) throw InvalidInput("kl_q_prior: prior scale must be > 0");
  if (m.rows() != v.rows() || m.cols() != v.cols()) throw InvalidInput("kl_q_prior: shape mismatch");
  if (!((v.array() > 0.0).all())) throw InvalidInput("kl_q_prior: variances must be > 0");
  const double s2 = prior_scale * prior_scale;
  const auto ratio = v.array() / s2;
  return 0.5 * (ratio + m.array().square() / s2 - 1.0 - ratio.log()).sum();
}

double elbo_loss(const Network& net, const Matrix& x_batch, const Vector& y_batch,
                 std::size_t n_total, int mc_samples, std::uint64_t seed, KlScale kl_mode) {
  return loss_impl(net, x_batch, y_batch, n_total, mc_samples, seed, kl_mode, nullptr);
}

double elbo_loss_and_gradient(const Network& net, const Matrix& x_batch, const Vector& y_batch,
                              std::size_t n_total, int mc_samples, std::uint64_t seed,
                              KlScale kl_mode, NetworkGradient& grad) {
  return loss_impl(net, x_batch, y_batch, n_total, mc_samples, seed, kl_mode, &grad);
}

TrainResult train(Network net, const Matrix& x, const Vector& y, const TrainConfig& config) {
  config.validate();
  check_input(net, x);
  if (x.rows() != y.size()) throw InvalidInput("train: feature rows and labels disagree");
  check_labels(net.config, y);

  const auto n = static_cast<std::size_t>(x.rows());
  std::mt19937_64 rng(config.seed);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_val = static_cast<std::size_t>(std::floor(config.val_fraction * static_cast<double>(n)));
  if (n - n_val < 1) throw InvalidInput("train: no rows left for training after validation split");
  std::vector<Eigen::Index> val_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<Eigen::Index> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  const Matrix x_train = x(train_rows, Eigen::all);
  const Vector y_train = y(train_rows);
  const Matrix x_val = x(val_rows, Eigen::all);
  const Vector y_val = y(val_rows);
  const std::size_t n_train = train_rows.size();

  const Metric metric = metric_for(net.config, n_val > 0);
  auto evaluate = [&](const Network& candidate) {
    if (metric.name == "val_accuracy") return accuracy(candidate, x_val, y_val);
    if (metric.name == "val_mse") return mse(candidate, x_val, y_val);
    return mse(candidate, x_train, y_train);
  };

  TrainResult result;
  result.history.metric_name = metric.name;

  std::vector<double> params = flatten(net);
  std::vector<double> m1(params.size(), 0.0), m2(params.size(), 0.0);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  long step = 0;

  Network best = net;
  double best_metric = 0.0;
  int since_best = 0;
  std::vector<Eigen::Index> batch_order(n_train);
  std::iota(batch_order.begin(), batch_order.end(), 0);
  const auto bs = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(batch_order.begin(), batch_order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_train; start += bs) {
      const std::size_t stop = std::min(n_train, start + bs);
      std::vector<Eigen::Index> rows(batch_order.begin() + static_cast<std::ptrdiff_t>(start),
                                     batch_order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Matrix xb = x_train(rows, Eigen::all);
      const Vector yb = y_train(rows);
      NetworkGradient grad;
      const double loss = elbo_loss_and_gradient(net, xb, yb, n_train, config.mc_samples, rng(),
                                                 config.kl_scale_mode, grad);
      if (!std::isfinite(loss)) throw TrainingDiverged(epoch, "non-finite loss");
      epoch_loss += loss;

      const std::vector<double> g = flatten(grad);
      ++step;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        m1[i] = beta1 * m1[i] + (1.0 - beta1) * g[i];
        m2[i] = beta2 * m2[i] + (1.0 - beta2) * g[i] * g[i];
        params[i] -= config.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + adam_eps);
      }
      unflatten(net, params);
    }
    epoch_loss /= static_cast<double>(n_train);
    if (!std::isfinite(epoch_loss)) throw TrainingDiverged(epoch, "non-finite epoch loss");

    const double value = evaluate(net);
    result.history.epochs.push_back({epoch, epoch_loss, value});
    const bool improved = epoch == 1 || (metric.higher_better ? value > best_metric : value < best_metric);
    if (improved) {
      best = net;
      best_metric = value;
      result.history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience && epoch < config.epochs) {
      result.history.stopped_early = true;
      break;
    }
  }
  result.network = std::move(best);
  return result;
}

LogitPosterior logit_posterior(const Network& net, const Matrix& x) {
  LogitPosterior lp;
  lp.activations = penultimate_activations(net, x);
  lp.mean = lp.activations * net.mean;
  lp.mean.rowwise() += net.out_bias.transpose();
  lp.bias = net.out_bias;
  const Matrix sd = net.log_var.array().exp().sqrt().matrix();
  lp.factors.reserve(static_cast<std::size_t>(net.c()));
  for (int j = 0; j < net.c(); ++j) {
    lp.factors.push_back(lp.activations * sd.col(j).asDiagonal());
  }
  return lp;
}

Matrix predict_proba(const Network& net, const Matrix& x) {
  if (net.config.link == Link::identity) {
    throw InvalidInput("predict_proba: unsupported for the identity link");
  }
  Matrix logits = penultimate_activations(net, x) * net.mean;
  logits.rowwise() += net.out_bias.transpose();
  if (net.config.link == Link::sigmoid) {
    return logits.unaryExpr([](double f) { return sigmoid(f); });
  }
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - top).exp();
    logits.row(i) = e / e.sum();
  }
  return logits;
}

Vector predict_labels(const Network& net, const Matrix& x) {
  const Matrix prob = predict_proba(net, x);
  Vector labels(prob.rows());
  for (Eigen::Index i = 0; i < prob.rows(); ++i) {
    if (net.config.link == Link::sigmoid) {
      labels(i) = prob(i, 0) > 0.5 ? 1.0 : 0.0;
    } else {
      Eigen::Index arg = 0;
      prob.row(i).maxCoeff(&arg);
      labels(i) = static_cast<double>(arg);
    }
  }
  return labels;
}

double accuracy(const Network& net, const Matrix& x, const Vector& y) {
  if (y.size() == 0) throw InvalidInput("accuracy: empty dataset");
  const Vector pred = predict_labels(net, x);
  return (pred.array() == y.array()).cast<double>().mean();
}

namespace {

// Walks parameter blocks in the canonical order shared by Network and NetworkGradient.
template <typename Params, typename Fn>
void visit_blocks(Params& params, Fn fn) {
  for (auto& l : params.hidden) {
    fn(l.weight.data(), l.weight.size());
    fn(l.bias.data(), l.bias.size());
  }
  fn(params.mean.data(), params.mean.size());
  fn(params.log_var.data(), params.log_var.size());
  fn(params.out_bias.data(), params.out_bias.size());
}

template <typename Params>
std::vector<double> flatten_blocks(const Params& params) {
  std::vector<double> out;
  visit_blocks(params, [&](const double* p, Eigen::Index len) { out.insert(out.end(), p, p + len); });
  return out;
}

}  // namespace

std::vector<double> flatten(const Network& net) { return flatten_blocks(net); }

std::vector<double> flatten(const NetworkGradient& grad) { return flatten_blocks(grad); }

void unflatten(Network& net, const std::vector<double>& params) {
  if (params.size() != net.parameter_count()) throw InvalidInput("unflatten: parameter count mismatch");
  std::size_t offset = 0;
  visit_blocks(net, [&](double* p, Eigen::Index len) {
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(offset), len, p);
    offset += static_cast<std::size_t>(len);
  });
}

}  // namespace ratekit
