#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "quasistat/error.hpp"

namespace quasistat {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Tolerance policy shared by every module.
///
/// All comparisons use the maximum-absolute-entry norm. `pd_margin` is an
/// absolute floor on the smallest eigenvalue of a metric, so nearly singular
/// metrics are rejected rather than rescaled.
struct Tolerances {
  double structural_tol = 1e-10;
  double ode_tol = 1e-9;
  double pd_margin = 1e-12;
  double hbar = 1.0;

  /// Throws InvalidArgument unless every field is strictly positive.
  void validate() const;
};

ComplexMatrix adjoint(const ComplexMatrix& m);

/// Maximum absolute entry.
double max_norm(const ComplexMatrix& m);

bool is_hermitian(const ComplexMatrix& m, const Tolerances& tol);

struct PositivityReport {
  bool positive_definite = false;
  double min_eigenvalue = 0.0;
  Eigen::VectorXd spectrum;  // ascending
};

/// Requires `m` Hermitian within structural_tol (NotHermitian otherwise).
PositivityReport is_positive_definite(const ComplexMatrix& m, const Tolerances& tol);

/// Hermitian positive-definite square root via eigendecomposition.
ComplexMatrix positive_sqrt(const ComplexMatrix& m, const Tolerances& tol);

/// Inverse of positive_sqrt(m), computed from the same eigendecomposition.
ComplexMatrix positive_inverse_sqrt(const ComplexMatrix& m, const Tolerances& tol);

/// First derivative of uniformly sampled data. Five-point stencils when at
/// least five samples are available (fourth order, one-sided at the ends),
/// three-point otherwise. With `periodic`, the last sample is taken to
/// coincide with the first and wrap-around stencils are used everywhere.
template <typename T>
std::vector<T> differentiate(std::span<const T> values, double step, bool periodic = false);

}  // namespace quasistat
