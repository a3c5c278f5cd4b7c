#pragma once

#include <stdexcept>
#include <string>

namespace ratekit {

// Each error category maps to one CLI exit code (see cli.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, bad shapes, malformed files, infeasible configs.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Factorization failures, diverged training, inconsistent precision models.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TrainingDiverged : public NumericalError {
 public:
  TrainingDiverged(int epoch, const std::string& what)
      : NumericalError("training diverged at epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace ratekit
