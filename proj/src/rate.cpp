#include "ratekit/rate.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include "ratekit/error.hpp"

namespace ratekit {

namespace {

constexpr double kConsistencyTol = 1e-9;

std::vector<int> complement(int p, const std::vector<int>& group) {
  std::vector<bool> in(static_cast<std::size_t>(p), false);
  for (int g : group) in[static_cast<std::size_t>(g)] = true;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(p) - group.size());
  for (int i = 0; i < p; ++i) {
    if (!in[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

void check_index(const PrecisionModel& pm, int j) {
  if (pm.p() < 2) throw InvalidInput("kld: need at least two features");
  if (j < 0 || j >= pm.p()) throw InvalidInput("kld: feature index out of range");
}

void check_group(const PrecisionModel& pm, const std::vector<int>& group) {
  if (group.empty()) throw InvalidInput("invalid group: empty");
  std::set<int> seen;
  for (int g : group) {
    if (g < 0 || g >= pm.p()) throw InvalidInput("invalid group: index out of range");
    if (!seen.insert(g).second) throw InvalidInput("invalid group: duplicate index");
  }
  if (static_cast<int>(group.size()) >= pm.p()) throw InvalidInput("invalid group: complement is empty");
}

// omega_j * lambda_j >= 1 for an exact inverse; tiny undershoot is round-off.
double diag_product(const PrecisionModel& pm, int j) {
  const double x = pm.omega(j, j) * pm.lambda(j, j);
  if (!(x >= 1.0 - kConsistencyTol)) {
    throw NumericalError("inconsistent precision model: omega_j * lambda_j = " + std::to_string(x) +
                         " < 1 for feature " + std::to_string(j));
  }
  return std::max(x, 1.0);
}

void finalize(ImportanceReport& report) {
  double total = 0.0;
  for (const auto& item : report.items) total += item.kld;
  const double uniform = 1.0 / static_cast<double>(report.items.size());
  report.degenerate = !(total > 0.0);
  for (auto& item : report.items) {
    item.rate = report.degenerate ? uniform : item.kld / total;
    item.significant = item.rate > uniform;
  }
  if (report.degenerate) report.warnings.push_back("all KLD values are zero; rates set uniform");
}

}  // namespace

std::string to_string(KldPath path) { return path == KldPath::naive ? "naive" : "fast"; }

KldPath kld_path_from_string(const std::string& name) {
  if (name == "naive") return KldPath::naive;
  if (name == "fast") return KldPath::fast;
  throw InvalidInput("unknown KLD path '" + name + "' (expected naive or fast)");
}

void GroupMap::add(std::string name, std::vector<int> indices) {
  names.push_back(std::move(name));
  members.push_back(std::move(indices));
}

void GroupMap::validate(int p) const {
  if (names.size() != members.size()) throw InvalidInput("group map: names and members disagree");
  for (std::size_t g = 0; g < members.size(); ++g) {
    const auto& m = members[g];
    if (m.empty()) throw InvalidInput("invalid group '" + names[g] + "': empty");
    std::set<int> uniq(m.begin(), m.end());
    if (uniq.size() != m.size()) throw InvalidInput("invalid group '" + names[g] + "': duplicate feature");
    if (*uniq.begin() < 0 || *uniq.rbegin() >= p) {
      throw InvalidInput("invalid group '" + names[g] + "': feature index out of range");
    }
    if (static_cast<int>(m.size()) >= p) {
      throw InvalidInput("invalid group '" + names[g] + "': complement is empty");
    }
  }
}

bool GroupMap::has_overlap() const {
  std::set<int> seen;
  for (const auto& m : members) {
    for (int i : m) {
      if (!seen.insert(i).second) return true;
    }
  }
  return false;
}

GroupMap GroupMap::singletons(int p, const std::vector<std::string>& feature_names) {
  GroupMap out;
  for (int j = 0; j < p; ++j) {
    out.add(feature_names.empty() ? "f" + std::to_string(j + 1) : feature_names.at(static_cast<std::size_t>(j)),
            {j});
  }
  return out;
}

std::vector<double> ImportanceReport::rates() const {
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.rate);
  return out;
}

PrecisionModel precision_from_covariance(const Vector& mu, const Matrix& omega, double base_jitter) {
  if (mu.size() < 2) throw InvalidInput("build_precision: need at least two features");
  if (omega.rows() != mu.size() || omega.cols() != mu.size()) {
    throw InvalidInput("build_precision: covariance shape does not match mu");
  }
  if (!mu.allFinite()) throw InvalidInput("build_precision: non-finite mu");
  const SpdFactor factor = chol_spd(omega, base_jitter);
  PrecisionModel pm;
  pm.mu = mu;
  pm.jitter = factor.jitter_used;
  pm.omega = 0.5 * (omega + omega.transpose());
  pm.omega.diagonal().array() += factor.jitter_used;
  Matrix inv = factor.solve(Matrix::Identity(mu.size(), mu.size()));
  pm.lambda = 0.5 * (inv + inv.transpose());
  pm.log_det_omega = factor.log_det;
  return pm;
}

PrecisionModel build_precision(const Vector& mu, const Matrix& factor, double base_jitter) {
  if (factor.rows() != mu.size()) throw InvalidInput("build_precision: factor rows do not match mu");
  return precision_from_covariance(mu, gram(factor), base_jitter);
}

PrecisionModel build_precision(const EffectSizePosterior& esa, int cls, double base_jitter) {
  if (cls < 0 || cls >= esa.c()) throw InvalidInput("build_precision: class index out of range");
  const auto c = static_cast<std::size_t>(cls);
  return build_precision(esa.mu[c], esa.factor[c], base_jitter);
}

double kld_variable_naive(const PrecisionModel& pm, int j) {
  check_index(pm, j);
  const std::vector<int> rest = complement(pm.p(), {j});
  const Matrix omega_rest = pm.omega(rest, rest);
  const Matrix lambda_rest = pm.lambda(rest, rest);
  const Vector lambda_cross = pm.lambda(rest, j);

  const Matrix prod = omega_rest * lambda_rest;
  const double trace = prod.trace();
  const double log_det = log_det_general(prod);

  Eigen::LLT<Matrix> llt(lambda_rest);
  if (llt.info() != Eigen::Success) throw NumericalError("kld_variable_naive: Lambda_{-j} not positive definite");
  const double delta = lambda_cross.dot(llt.solve(lambda_cross));

  const double mu_j = pm.mu(j);
  const double p_rest = static_cast<double>(pm.p() - 1);
  return 0.5 * (trace - log_det - p_rest + delta * mu_j * mu_j);
}

double kld_variable_fast(const PrecisionModel& pm, int j) {
  check_index(pm, j);
  const double excess = diag_product(pm, j) - 1.0;
  const double mu_j = pm.mu(j);
  return 0.5 * (excess - std::log1p(excess) + excess / pm.omega(j, j) * mu_j * mu_j);
}

double kld_group(const PrecisionModel& pm, const std::vector<int>& group) {
  check_group(pm, group);
  const std::vector<int> rest = complement(pm.p(), group);
  const Matrix omega_rest = pm.omega(rest, rest);
  const Matrix lambda_rest = pm.lambda(rest, rest);
  const Matrix lambda_cross = pm.lambda(group, rest);

  const Matrix prod = omega_rest * lambda_rest;
  Eigen::LLT<Matrix> llt(lambda_rest);
  if (llt.info() != Eigen::Success) throw NumericalError("kld_group: Lambda_{-J} not positive definite");
  const Matrix delta = lambda_cross * llt.solve(lambda_cross.transpose());
  const Vector mu_g = pm.mu(group);

  const double p_rest = static_cast<double>(rest.size());
  return 0.5 * (prod.trace() - log_det_general(prod) - p_rest + mu_g.dot(delta * mu_g));
}

double kld_group_fast(const PrecisionModel& pm, const std::vector<int>& group) {
  check_group(pm, group);
  const Matrix omega_g = pm.omega(group, group);
  const Matrix lambda_g = pm.lambda(group, group);
  const Vector mu_g = pm.mu(group);
  const Matrix prod = omega_g * lambda_g;
  const auto m = static_cast<double>(group.size());

  Eigen::LLT<Matrix> llt(omega_g);
  if (llt.info() != Eigen::Success) throw NumericalError("kld_group_fast: Omega_J not positive definite");
  const double quad = mu_g.dot(lambda_g * mu_g) - mu_g.dot(llt.solve(mu_g));
  const double value = 0.5 * (prod.trace() - m - log_det_general(prod) + quad);
  return std::max(value, 0.0);
}

double mutual_info(const PrecisionModel& pm, int j) {
  check_index(pm, j);
  return 0.5 * std::log(diag_product(pm, j));
}

ImportanceReport rate_scores(const PrecisionModel& pm, KldPath path,
                             const std::vector<std::string>& feature_names) {
  const int p = pm.p();
  if (p < 2) throw InvalidInput("rate_scores: need at least two features");
  if (!feature_names.empty() && static_cast<int>(feature_names.size()) != p) {
    throw InvalidInput("rate_scores: feature name count does not match p");
  }
  ImportanceReport report;
  report.items.resize(static_cast<std::size_t>(p));
  parallel_for(static_cast<std::size_t>(p), [&](std::size_t idx) {
    const int j = static_cast<int>(idx);
    auto& item = report.items[idx];
    item.name = feature_names.empty() ? "f" + std::to_string(j + 1) : feature_names[idx];
    item.kld = path == KldPath::naive ? kld_variable_naive(pm, j) : kld_variable_fast(pm, j);
    item.sign = (pm.mu(j) > 0.0) - (pm.mu(j) < 0.0);
    item.mi = mutual_info(pm, j);
  });
  finalize(report);
  return report;
}

ImportanceReport group_rate(const PrecisionModel& pm, const GroupMap& groups, KldPath path) {
  if (groups.size() < 2) throw InvalidInput("group_rate: need at least two groups");
  groups.validate(pm.p());
  ImportanceReport report;
  report.is_group = true;
  report.items.resize(groups.size());
  parallel_for(groups.size(), [&](std::size_t g) {
    auto& item = report.items[g];
    item.name = groups.names[g];
    item.members = groups.members[g];
    item.kld = path == KldPath::naive ? kld_group(pm, item.members) : kld_group_fast(pm, item.members);
  });
  if (groups.has_overlap()) report.warnings.push_back("groups overlap; rates normalized over the given groups");
  finalize(report);
  return report;
}

}  // namespace ratekit
