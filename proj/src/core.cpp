#include "ratekit/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ratekit/error.hpp"

namespace ratekit {

Matrix SpdFactor::solve(const Matrix& rhs) const {
  Matrix tmp = lower.triangularView<Eigen::Lower>().solve(rhs);
  return lower.transpose().triangularView<Eigen::Upper>().solve(tmp);
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix center_columns(const Matrix& m) {
  if (m.rows() == 0) throw InvalidInput("center_columns: matrix has no rows");
  if (!m.allFinite()) throw InvalidInput("center_columns: non-finite entry");
  Eigen::RowVectorXd mean = m.colwise().mean();
  return m.rowwise() - mean;
}

namespace {

Matrix symmetrized(const Matrix& s, const char* who) {
  if (s.rows() != s.cols() || s.rows() == 0) {
    throw InvalidInput(std::string(who) + ": matrix must be square and non-empty");
  }
  if (!s.allFinite()) throw InvalidInput(std::string(who) + ": non-finite entry");
  const double scale = s.norm();
  const double asym = (s - s.transpose()).norm();
  if (asym > 1e-6 * scale) {
    throw InvalidInput(std::string(who) + ": matrix is not symmetric (relative asymmetry " +
                       std::to_string(asym / scale) + ")");
  }
  return 0.5 * (s + s.transpose());
}

}  // namespace

SpdFactor chol_spd(const Matrix& s_in, double base_jitter) {
  if (!(base_jitter >= 0.0)) throw InvalidInput("chol_spd: base_jitter must be >= 0");
  const Matrix s = symmetrized(s_in, "chol_spd");
  const auto p = s.rows();
  double scale = s.trace() / static_cast<double>(p);
  if (!(scale > 0.0)) scale = 1.0;

  double tau = base_jitter * scale;
  for (int attempt = 0; attempt <= kMaxJitterEscalations; ++attempt) {
    Matrix shifted = s;
    shifted.diagonal().array() += tau;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() == Eigen::Success) {
      Matrix lower = llt.matrixL();
      const auto diag = lower.diagonal().array();
      if ((diag > 0.0).all() && diag.allFinite()) {
        const double log_det = 2.0 * diag.log().sum();
        return SpdFactor{std::move(lower), log_det, tau};
      }
    }
    // A zero starting jitter cannot escalate multiplicatively.
    tau = tau > 0.0 ? tau * 10.0 : 1e-12 * scale;
  }
  throw NotPositiveDefinite("chol_spd: factorization failed after " +
                            std::to_string(kMaxJitterEscalations) + " jitter escalations");
}

Matrix spd_inverse(const Matrix& s, double base_jitter) {
  const SpdFactor f = chol_spd(s, base_jitter);
  Matrix inv = f.solve(Matrix::Identity(s.rows(), s.cols()));
  return 0.5 * (inv + inv.transpose());
}

Matrix gram(const Matrix& g) {
  if (g.size() == 0) throw InvalidInput("gram: empty factor");
  Matrix out = Matrix::Zero(g.rows(), g.rows());
  out.selfadjointView<Eigen::Lower>().rankUpdate(g);
  return out.selfadjointView<Eigen::Lower>();
}

double log_det_general(const Matrix& m) {
  Eigen::PartialPivLU<Matrix> lu(m);
  const Matrix& packed = lu.matrixLU();
  double log_abs = 0.0;
  int sign = lu.permutationP().determinant();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    const double d = packed(i, i);
    if (d == 0.0) throw NumericalError("log_det_general: singular matrix");
    if (d < 0.0) sign = -sign;
    log_abs += std::log(std::abs(d));
  }
  if (sign < 0) throw NumericalError("log_det_general: negative determinant");
  return log_abs;
}

std::size_t thread_budget() {
  if (const char* env = std::getenv("RATEKIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<std::size_t>(v);
  }
  return 1;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(thread_budget(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ratekit
