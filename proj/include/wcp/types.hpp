#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace wcp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Malformed or inconsistent user input (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver breakdown, non-finite values, failed linear solves (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A check was requested without the certificate it depends on (CLI exit code 1).
class MissingCertificate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wcp
