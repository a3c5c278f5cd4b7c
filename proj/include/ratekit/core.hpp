#pragma once

// Dense linear-algebra kernel shared by every other module.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace ratekit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultJitter = 1e-8;
inline constexpr int kMaxJitterEscalations = 6;

// Cholesky factor of S + jitter_used * I.
struct SpdFactor {
  Matrix lower;
  double log_det = 0.0;
  double jitter_used = 0.0;

  // Solves (S + jitter_used * I) x = b.
  Matrix solve(const Matrix& rhs) const;
};

bool all_finite(const Matrix& m);

// C * M with C = I - 11^T / n.
Matrix center_columns(const Matrix& m);

// Symmetrizes S and factors S + tau*I, starting at tau = base_jitter * trace(S) / p
// and multiplying by 10 on failure, at most kMaxJitterEscalations times.
// Throws InvalidInput when S is asymmetric beyond 1e-6 relative Frobenius error.
SpdFactor chol_spd(const Matrix& s, double base_jitter = kDefaultJitter);

// (S + tau*I)^{-1}, exactly symmetric.
Matrix spd_inverse(const Matrix& s, double base_jitter = kDefaultJitter);

// G * G^T, exactly symmetric.
Matrix gram(const Matrix& g);

// Log-determinant of a general square matrix via partial-pivot LU. Throws
// NumericalError if the determinant is not positive.
double log_det_general(const Matrix& m);

// Worker count for internal parallel loops; honours RATEKIT_THREADS (default 1).
std::size_t thread_budget();

// Runs body(i) for i in [0, count) across at most thread_budget() threads.
// body must only write to slots owned by index i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace ratekit
