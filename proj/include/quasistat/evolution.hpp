#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "quasistat/model.hpp"
#include "quasistat/numerics.hpp"

namespace quasistat {

struct IntegratorInfo {
  std::string method;
  double step = 0.0;            // smallest internal substep used
  double error_estimate = 0.0;  // largest per-interval step-halving estimate
  std::size_t substeps_total = 0;
};

/// U(t_i) on a uniform grid, U(t_0) = I.
struct PropagatorResult {
  std::vector<double> times;
  std::vector<ComplexMatrix> u;
  IntegratorInfo integrator;
};

/// Uniform grid with `intervals` equal intervals on [t0, t1].
std::vector<double> uniform_grid(double t0, double t1, std::size_t intervals);

/// Solves i hbar dU/dt = H(t) U with classical RK4. Each grid interval is
/// integrated with m and 2m substeps; m doubles until the difference, scaled
/// by 1/15, is at most ode_tol (1 + |U|). The 2m result is kept.
PropagatorResult propagate(const HamiltonianModel& model, std::span<const double> grid, const Tolerances& tol);

/// Fixed number of RK4 substeps per grid interval, no error control.
PropagatorResult propagate_fixed(const HamiltonianModel& model, std::span<const double> grid,
                                 std::size_t substeps, const Tolerances& tol);

struct DefectSeries {
  std::vector<double> values;
  double max = 0.0;
};

/// d_i = |U_i^dagger eta U_i - eta|.
DefectSeries unitarity_defect(const PropagatorResult& result, const ComplexMatrix& eta);

struct XiFlow {
  std::vector<ComplexMatrix> xi;
  std::vector<double> residuals;  // |H^dagger xi - xi H - i hbar dxi/dt|
  double max_residual = 0.0;
};

/// xi(t_i) = U_i^{-dagger} xi0 U_i^{-1}; dxi/dt by finite differences on the grid.
XiFlow xi_flow(const HamiltonianModel& model, const PropagatorResult& result, const ComplexMatrix& xi0,
               const Tolerances& tol);

/// s_i = <U_i psi0 | M | U_i phi0> for a constant metric M.
std::vector<Complex> norm_history(const PropagatorResult& result, const ComplexVector& psi0,
                                  const ComplexVector& phi0, const ComplexMatrix& metric);
/// Same, with a metric series M_i (e.g. the flowed xi).
std::vector<Complex> norm_history(const PropagatorResult& result, const ComplexVector& psi0,
                                  const ComplexVector& phi0, std::span<const ComplexMatrix> metrics);

/// CSV with header `t,re,im`. Locale-independent shortest round-trip numbers.
void write_complex_series_csv(std::ostream& out, std::span<const double> times, std::span<const Complex> values);
/// CSV with header `t,<column>` (e.g. `t,defect`).
void write_real_series_csv(std::ostream& out, std::span<const double> times, std::span<const double> values,
                           const std::string& column = "defect");

/// Shortest round-trip decimal rendering, always with '.' as separator.
std::string format_number(double v);

}  // namespace quasistat
