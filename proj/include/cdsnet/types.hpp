#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace cdsnet {

using Scalar = double;
using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Clamp a value to the unit interval.
inline Scalar truncate01(Scalar x) {
  if (x < 0.0) return 0.0;
  if (x > 1.0) return 1.0;
  return x;
}

/// Componentwise clamp to [0,1]^n.
inline Vector truncate01(const Vector& v) {
  return v.cwiseMax(0.0).cwiseMin(1.0);
}

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A bank has zero assets and zero liabilities where a ratio is required.
struct DegenerateNetworkError : std::runtime_error {
  explicit DegenerateNetworkError(const std::string& what) : std::runtime_error(what) {}
};

/// Operation is only defined for networks without default costs (alpha = beta = 1).
struct DefaultCostsError : std::runtime_error {
  explicit DefaultCostsError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested evaluation order does not exist.
struct CyclicDependencyError : std::runtime_error {
  explicit CyclicDependencyError(const std::string& what) : std::runtime_error(what) {}
};

/// Enumeration space exceeds the configured cap.
struct CapExceededError : std::runtime_error {
  explicit CapExceededError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cdsnet
