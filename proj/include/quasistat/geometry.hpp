#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "quasistat/model.hpp"
#include "quasistat/two_level.hpp"

namespace quasistat::geometry {

using two_level::TwoLevelParams;

struct PathSample {
  double t = 0.0;
  TwoLevelParams params;
};

/// Uniformly sampled curve in the two-level parameter chart.
struct ParameterPath {
  std::vector<PathSample> samples;
  bool closed = false;  // first and last Hamiltonians coincide
};

/// Validates uniform spacing and branch continuity (adjacent theta and phi
/// differ by less than pi/2; BranchTrackingFailure otherwise) and sets `closed`.
ParameterPath make_path(std::span<const double> times, std::span<const TwoLevelParams> params, const Tolerances& tol);

/// Decomposes a 2x2 model on the grid with branch tracking. With `metric`,
/// |n1|, |n2| are fixed at every sample so that the left eigenprojectors sum
/// to it; otherwise n1 = n2 = 1.
ParameterPath path_from_model(const HamiltonianModel& model, std::span<const double> grid, const Tolerances& tol,
                              const std::optional<ComplexMatrix>& metric = std::nullopt);

/// The same samples traversed backwards in time.
ParameterPath reversed(const ParameterPath& path);

enum class Gauge {
  Raw,             // normalizations as stored in the path
  ImagCancelling,  // |n_a(t)| evolved from the first sample so Im A_aa = 0
};

struct ConnectionSeries {
  std::vector<double> times;
  std::vector<Eigen::Matrix2cd> values;  // A_mn = i <phi_m| d/dt |psi_n>
};

ConnectionSeries connection(const ParameterPath& path, Gauge gauge);

/// max over samples and (m, n) of |A_mn - conj(A_nm)|.
double hermiticity_defect(const ConnectionSeries& a);

/// Loop integral of A_nn (trapezoidal), `level` 0 for E = q + E, 1 for q - E.
Complex geometric_phase(const ParameterPath& path, std::size_t level, Gauge gauge = Gauge::ImagCancelling);

}  // namespace quasistat::geometry
