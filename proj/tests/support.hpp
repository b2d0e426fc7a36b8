#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "quasistat/model.hpp"
#include "quasistat/numerics.hpp"
#include "quasistat/two_level.hpp"

namespace qs_test {

using quasistat::Complex;
using quasistat::ComplexMatrix;
using quasistat::ComplexVector;
using quasistat::HamiltonianModel;
using quasistat::TermExpr;
using quasistat::two_level::TwoLevelParams;

inline constexpr double pi = std::numbers::pi;

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Complex random_complex(double scale = 1.0) { return {uniform(-scale, scale), uniform(-scale, scale)}; }

inline ComplexMatrix random_matrix(Eigen::Index n, double scale = 1.0) {
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = random_complex(scale);
  return m;
}

inline ComplexMatrix random_hermitian(Eigen::Index n, double scale = 1.0) {
  const ComplexMatrix m = random_matrix(n, scale);
  return 0.5 * (m + m.adjoint());
}

/// Hermitian with eigenvalues in [lo, hi].
inline ComplexMatrix random_positive(Eigen::Index n, double lo = 0.3, double hi = 3.0) {
  const Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(n));
  const ComplexMatrix q = qr.householderQ();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = uniform(lo, hi);
  return q * d.cast<Complex>().asDiagonal() * q.adjoint();
}

/// Chart parameters with complex theta and phi, away from the chart edge.
inline TwoLevelParams random_params(double imag = 0.8) {
  TwoLevelParams p;
  p.q = uniform(-2.0, 2.0);
  p.energy = uniform(0.2, 3.0);
  p.theta = {uniform(0.2, pi - 0.2), uniform(-imag, imag)};
  p.phi = {uniform(0.0, 2.0 * pi), uniform(-imag, imag)};
  p.n1 = std::polar(uniform(0.3, 3.0), uniform(0.0, 2.0 * pi));
  p.n2 = std::polar(uniform(0.3, 3.0), uniform(0.0, 2.0 * pi));
  return p;
}

/// exp(M) by scaling and squaring around a truncated Taylor series.
inline ComplexMatrix expm_taylor(const ComplexMatrix& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const ComplexMatrix a = m / std::pow(2.0, squarings);
  ComplexMatrix term = ComplexMatrix::Identity(m.rows(), m.cols());
  ComplexMatrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

/// Exact propagator of [[0, e^{it}], [e^{-it}, 0]] with hbar = 1, obtained in
/// the frame co-rotating with the off-diagonal phase:
/// U(t) = diag(e^{it/2}, e^{-it/2}) exp(-i K t), K = sigma_x + sigma_z / 2.
inline ComplexMatrix rotating_propagator(double t) {
  const Complex i{0.0, 1.0};
  const double w = std::sqrt(5.0) / 2.0;
  ComplexMatrix k(2, 2);
  k << 0.5, 1.0, 1.0, -0.5;
  const ComplexMatrix inner = std::cos(w * t) * ComplexMatrix::Identity(2, 2) - i * (std::sin(w * t) / w) * k;
  ComplexMatrix frame = ComplexMatrix::Zero(2, 2);
  frame(0, 0) = std::exp(i * (t / 2.0));
  frame(1, 1) = std::exp(-i * (t / 2.0));
  return frame * inner;
}

inline HamiltonianModel rotating_model() {
  const Complex i{0.0, 1.0};
  return HamiltonianModel(2, {{}, {TermExpr::expo(1.0, i)}, {TermExpr::expo(1.0, -i)}, {}}, "rotating");
}

inline HamiltonianModel exponential_model() {
  return HamiltonianModel(2, {{}, {TermExpr::expo(2.0, 1.0)}, {TermExpr::expo(0.5, -1.0)}, {}}, "exponential");
}

inline HamiltonianModel trivial_model() {
  return HamiltonianModel(
      2, {{}, {TermExpr::constant(2.0), TermExpr::poly(2.0, 2)}, {TermExpr::constant(0.5), TermExpr::poly(0.5, 2)}, {}},
      "trivial");
}

/// Non-Hermitian case-1 model: real theta, phi = omega t + i y with constant y.
inline HamiltonianModel case1_model(double q, double energy, double theta, double y, double omega = 1.0) {
  const Complex i{0.0, 1.0};
  const double c = energy * std::cos(theta);
  const double s = energy * std::sin(theta);
  return HamiltonianModel(2,
                          {{TermExpr::constant(q + c)},
                           {TermExpr::expo(s * std::exp(y), -i * omega)},
                           {TermExpr::expo(s * std::exp(-y), i * omega)},
                           {TermExpr::constant(q - c)}},
                          "case1");
}

/// H(t) = eta^{-1/2} (A + cos(w t) B + sin(w t) C) eta^{1/2} with Hermitian
/// A, B, C: pseudo-Hermitian with respect to the constant metric eta.
inline HamiltonianModel similar_to_hermitian(const ComplexMatrix& eta, const ComplexMatrix& a, const ComplexMatrix& b,
                                             const ComplexMatrix& c, double w) {
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(eta);
  const ComplexMatrix root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cast<Complex>().asDiagonal() *
                             es.eigenvectors().adjoint();
  const ComplexMatrix inv = root.inverse();
  const ComplexMatrix ta = inv * a * root;
  const ComplexMatrix tb = inv * b * root;
  const ComplexMatrix tc = inv * c * root;
  const auto n = static_cast<std::size_t>(eta.rows());
  std::vector<quasistat::EntryTerms> entries(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      entries[i * n + j] = {TermExpr::constant(ta(ii, jj)), TermExpr::cos(tb(ii, jj), w), TermExpr::sin(tc(ii, jj), w)};
    }
  }
  return HamiltonianModel(n, std::move(entries), "similar-to-hermitian");
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Scale-free comparison of two metrics (each divided by its trace).
inline double metric_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  return max_abs(a / a.trace().real() - b / b.trace().real());
}

inline std::vector<double> linspace(double t0, double t1, std::size_t intervals) {
  std::vector<double> g(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) g[i] = t0 + (t1 - t0) * static_cast<double>(i) / intervals;
  return g;
}

}  // namespace qs_test
