#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace debias {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;
using Index = Eigen::Index;

// Base error; subclasses map onto the C API status codes and CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: bad arguments, malformed files, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Linear-algebra or optimization failure (non-finite values, factorization
// breakdown after jitter escalation, all restarts failed).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Filesystem problems.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace debias
