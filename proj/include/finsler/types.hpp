#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <stdexcept>
#include <string>

namespace finsler {

/// Largest manifold dimension handled without heap allocation.
inline constexpr int kMaxDim = 6;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
/// Ambient (embedding) coordinates: one more than the manifold dimension.
using AmbientVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim + 1, 1>;

/// Fixed-capacity scratch storage for templated kernels.
template <class T>
using Buf = std::array<T, kMaxDim + 1>;

struct ChartPoint {
  int chart = 0;
  Vector coords;
};

struct TangentVector {
  ChartPoint base;
  Vector components;
};

struct Covector {
  ChartPoint base;
  Vector components;
};

// ---- errors ----------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// y = 0 where a nonzero direction is required.
class SingularityError : public Error {
 public:
  using Error::Error;
};

class ConvexityError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class NavigationDomainError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DegenerateFlagError : public Error {
 public:
  using Error::Error;
};

class DensityError : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

class UnreachableError : public Error {
 public:
  using Error::Error;
};

class CriticalPointError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace finsler
