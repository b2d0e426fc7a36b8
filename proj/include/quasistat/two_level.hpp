#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "quasistat/model.hpp"
#include "quasistat/numerics.hpp"

namespace quasistat::two_level {

using Vector2 = Eigen::Vector2cd;

/// H = q I + E [[cos th, e^{-i ph} sin th], [e^{i ph} sin th, -cos th]],
/// with eigenvalues q + E and q - E. n1, n2 are the free normalization
/// constants of the biorthonormal vectors.
struct TwoLevelParams {
  double q = 0.0;
  double energy = 0.0;
  Complex theta{0.0, 0.0};
  Complex phi{0.0, 0.0};
  Complex n1{1.0, 0.0};
  Complex n2{1.0, 0.0};
};

struct Decomposition {
  double q = 0.0;
  Complex a, b, c;  // H - q I = [[a, b], [c, -a]]
  TwoLevelParams params;
};

/// Splits a diagonalizable real-spectrum 2x2 matrix into (q, a, b, c) and
/// chart coordinates with Re(theta) in [0, pi] and Re(phi) in [0, 2 pi).
/// Throws ComplexSpectrum, ScalarMatrix, NotDiagonalizable, or OutsideChart
/// (theta on the chart boundary while b or c is nonzero).
Decomposition decompose(const ComplexMatrix& h, const Tolerances& tol);

/// As decompose, but selects the (theta, phi) branch nearest to `previous`.
/// Throws BranchTrackingFailure when either angle moves by more than pi/2.
Decomposition decompose_near(const ComplexMatrix& h, const TwoLevelParams& previous, const Tolerances& tol);

ComplexMatrix compose(const TwoLevelParams& p);

struct Eigenvectors {
  Vector2 psi1, psi2;  // H psi = E psi
  Vector2 phi1, phi2;  // H^dagger phi = E phi
};

Eigenvectors eigvecs(const TwoLevelParams& p);

struct MetricTerms {
  double a = 0.0;      // |cos(th/2)|^2
  double b = 0.0;      // |sin(th/2)|^2
  Complex zeta;        // sin(th/2) cos(th*/2)
  Complex lambda;      // e^{i ph*} (u zeta* - zeta)
  double k = 1.0;
  double u = 1.0;
  double r = 0.0;      // e^{2 Im ph} (a + b u)
  double s = 0.0;      // a u + b
  double nu1 = 0.0;    // ln|n1|
  double nu2 = 0.0;
  double mu = 0.0;     // (|n1|^2 - |n2|^2) / (|n1|^2 + |n2|^2)
};

MetricTerms metric_terms(const TwoLevelParams& p, double k, double u);

/// Closed-form metric family k [[s, lambda*], [lambda, r]].
ComplexMatrix metric_closed_form(const TwoLevelParams& p, double k, double u);

/// Returns p with |n1|, |n2| chosen so that sum |phi_n><phi_n| equals eta
/// (phases of n1, n2 kept). Throws NotPseudoHermitian when eta is not of
/// that form within structural_tol, NotPositiveDefinite for nonpositive weights.
TwoLevelParams normalization_from_metric(const TwoLevelParams& p, const ComplexMatrix& eta, const Tolerances& tol);

/// Time derivatives of the chart coordinates along a path.
struct Rates {
  Complex theta_dot;
  Complex phi_dot;
  double nu1_dot = 0.0;
  double nu2_dot = 0.0;
};

/// Left-hand sides of the quasi-stationarity system at one point:
///   Im[sin^2(th/2) ph'] + nu1',  Im[cos^2(th/2) ph'] + nu2',
///   Im th' - mu Re[sin th ph'],  mu Re th' + Im[sin th ph'].
std::array<double, 4> qs_residual(const TwoLevelParams& p, const Rates& rates);

struct ResidualSeries {
  std::vector<std::array<double, 4>> values;
  double max_abs = 0.0;
};

/// Residual system on a uniform grid, derivatives by finite differences.
ResidualSeries qs_residuals(std::span<const double> times, std::span<const TwoLevelParams> path);
/// Residual system with exact derivatives supplied by the caller.
ResidualSeries qs_residuals(std::span<const TwoLevelParams> path, std::span<const Rates> rates);

/// Decomposes every sample with continuous branch tracking from the first.
std::vector<TwoLevelParams> track_parameters(std::span<const ComplexMatrix> samples, const Tolerances& tol);

enum class Verdict {
  QuasiStationaryCase1,
  QuasiStationaryCase2,
  TrivialFamily,
  NotQuasiStationary,
  NotRealDiagonalizable,
};

const char* to_string(Verdict v) noexcept;

struct Diagnostics {
  std::string failing_condition;
  double trivial_residual = 0.0;  // max ||H0(t) - g(t) H0(t0)|| / scale
  double case1_residual = -1.0;   // -1 when not evaluated
  double case2_residual = -1.0;
  std::vector<double> fitted_f;   // g(t) for the trivial family, f(t) for case 2
  std::size_t solver_dim = 0;
  bool solver_has_positive_member = false;
  bool cross_check_agrees = false;
  std::string cross_check_note;
};

struct Classification {
  Verdict verdict = Verdict::NotQuasiStationary;
  bool u_fixed = false;
  double u = 0.0;
  std::optional<ComplexMatrix> metric;  // k = 1
  Diagnostics diagnostics;
};

/// Decides quasi-stationarity of a 2x2 model on a time grid whose first point
/// is the reference time. The verdict is cross-checked against the general
/// constant-metric solver; see diagnostics.cross_check_agrees.
Classification classify(const HamiltonianModel& model, std::span<const double> grid, const Tolerances& tol);

/// Structured-text (JSON) rendering of a classification.
std::string to_json(const Classification& c);

}  // namespace quasistat::two_level
