#include "quasistat/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace quasistat {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::NotDiagonalizable: return "NotDiagonalizable";
    case ErrorKind::ComplexSpectrum: return "ComplexSpectrum";
    case ErrorKind::SingularMetric: return "SingularMetric";
    case ErrorKind::NotPseudoHermitian: return "NotPseudoHermitian";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::NoPositiveMember: return "NoPositiveMember";
    case ErrorKind::ScalarMatrix: return "ScalarMatrix";
    case ErrorKind::OutsideChart: return "OutsideChart";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::BranchTrackingFailure: return "BranchTrackingFailure";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

void Tolerances::validate() const {
  if (!(structural_tol > 0.0) || !(ode_tol > 0.0) || !(pd_margin > 0.0) || !(hbar > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "tolerances and hbar must be strictly positive");
  }
}

ComplexMatrix adjoint(const ComplexMatrix& m) { return m.adjoint(); }

double max_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, const Tolerances& tol) {
  if (m.rows() != m.cols()) return false;
  return max_norm(m - m.adjoint()) <= tol.structural_tol * std::max(1.0, max_norm(m));
}

namespace {

void require_hermitian(const ComplexMatrix& m, const Tolerances& tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "expected a non-empty square matrix");
  }
  if (!is_hermitian(m, tol)) {
    std::ostringstream os;
    os << "anti-Hermitian part has max entry " << max_norm(m - m.adjoint()) / 2;
    throw Error(ErrorKind::NotHermitian, os.str());
  }
}

Eigen::SelfAdjointEigenSolver<ComplexMatrix> hermitian_eigen(const ComplexMatrix& m) {
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  return Eigen::SelfAdjointEigenSolver<ComplexMatrix>(sym);
}

ComplexMatrix spectral_power(const ComplexMatrix& m, const Tolerances& tol, double power) {
  require_hermitian(m, tol);
  const auto es = hermitian_eigen(m);
  const Eigen::VectorXd& w = es.eigenvalues();
  if (!(w.minCoeff() > tol.pd_margin)) {
    std::ostringstream os;
    os << "smallest eigenvalue " << w.minCoeff() << " is not above " << tol.pd_margin;
    throw Error(ErrorKind::NotPositiveDefinite, os.str());
  }
  const Eigen::VectorXd p = w.array().pow(power).matrix();
  const ComplexMatrix& v = es.eigenvectors();
  ComplexMatrix out = v * p.cast<Complex>().asDiagonal() * v.adjoint();
  return 0.5 * (out + out.adjoint());
}

}  // namespace

PositivityReport is_positive_definite(const ComplexMatrix& m, const Tolerances& tol) {
  require_hermitian(m, tol);
  const auto es = hermitian_eigen(m);
  PositivityReport report;
  report.spectrum = es.eigenvalues();
  report.min_eigenvalue = report.spectrum.minCoeff();
  report.positive_definite = report.min_eigenvalue > tol.pd_margin;
  return report;
}

ComplexMatrix positive_sqrt(const ComplexMatrix& m, const Tolerances& tol) {
  return spectral_power(m, tol, 0.5);
}

ComplexMatrix positive_inverse_sqrt(const ComplexMatrix& m, const Tolerances& tol) {
  return spectral_power(m, tol, -0.5);
}

namespace {

template <typename T>
T zero_like(const T& v) {
  if constexpr (std::is_arithmetic_v<T> || std::is_same_v<T, Complex>) {
    return T{};
  } else {
    return T::Zero(v.rows(), v.cols());
  }
}

}  // namespace

template <typename T>
std::vector<T> differentiate(std::span<const T> f, double h, bool periodic) {
  const std::size_t count = f.size();
  if (count < 3) {
    throw Error(ErrorKind::GridTooCoarse, "at least three samples are needed to differentiate");
  }
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "sample spacing must be positive");
  std::vector<T> out(count, zero_like(f[0]));

  if (periodic) {
    const std::size_t n = count - 1;  // distinct samples
    auto at = [&](std::ptrdiff_t i) -> const T& {
      const auto m = static_cast<std::ptrdiff_t>(n);
      return f[static_cast<std::size_t>(((i % m) + m) % m)];
    };
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = static_cast<std::ptrdiff_t>(k);
      if (n >= 4) {
        out[k] = (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h);
      } else {
        out[k] = (at(i + 1) - at(i - 1)) / (2.0 * h);
      }
    }
    out[n] = out[0];
    return out;
  }

  if (count >= 5) {
    out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    for (std::size_t i = 2; i + 2 < count; ++i) {
      out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    }
    const std::size_t e = count - 1;
    out[e] = (25.0 * f[e] - 48.0 * f[e - 1] + 36.0 * f[e - 2] - 16.0 * f[e - 3] + 3.0 * f[e - 4]) /
             (12.0 * h);
    out[e - 1] = (3.0 * f[e] + 10.0 * f[e - 1] - 18.0 * f[e - 2] + 6.0 * f[e - 3] - f[e - 4]) /
                 (12.0 * h);
    return out;
  }

  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < count; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  const std::size_t e = count - 1;
  out[e] = (3.0 * f[e] - 4.0 * f[e - 1] + f[e - 2]) / (2.0 * h);
  return out;
}

template std::vector<double> differentiate(std::span<const double>, double, bool);
template std::vector<Complex> differentiate(std::span<const Complex>, double, bool);
template std::vector<ComplexMatrix> differentiate(std::span<const ComplexMatrix>, double, bool);
template std::vector<ComplexVector> differentiate(std::span<const ComplexVector>, double, bool);

}  // namespace quasistat
