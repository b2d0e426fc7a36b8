#include "quasistat/evolution.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace quasistat {

namespace {

// Smallest substep relative to the total interval before giving up.
constexpr double kMinRelativeStep = 1e-12;
constexpr std::size_t kMaxSubsteps = std::size_t{1} << 24;

void check_grid(std::span<const double> grid) {
  if (grid.size() < 2) throw Error(ErrorKind::GridTooCoarse, "propagation needs at least two grid points");
  const double h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid must be increasing");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs((grid[i] - grid[i - 1]) - h) > 1e-6 * h) {
      throw Error(ErrorKind::InvalidArgument, "grid must be uniform");
    }
  }
}

class Rk4 {
 public:
  Rk4(const HamiltonianModel& model, double hbar) : model_(model), scale_(Complex(0.0, -1.0 / hbar)) {}

  ComplexMatrix advance(ComplexMatrix u, double t0, double t1, std::size_t substeps) const {
    const double h = (t1 - t0) / static_cast<double>(substeps);
    for (std::size_t k = 0; k < substeps; ++k) {
      const double t = t0 + static_cast<double>(k) * h;
      const ComplexMatrix h_start = model_.eval(t);
      const ComplexMatrix h_mid = model_.eval(t + 0.5 * h);
      const ComplexMatrix h_end = model_.eval(t + h);
      const ComplexMatrix k1 = scale_ * (h_start * u);
      const ComplexMatrix k2 = scale_ * (h_mid * (u + (0.5 * h) * k1));
      const ComplexMatrix k3 = scale_ * (h_mid * (u + (0.5 * h) * k2));
      const ComplexMatrix k4 = scale_ * (h_end * (u + h * k3));
      u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return u;
  }

 private:
  const HamiltonianModel& model_;
  Complex scale_;
};

PropagatorResult start(const HamiltonianModel& model, std::span<const double> grid) {
  PropagatorResult result;
  result.times.assign(grid.begin(), grid.end());
  const auto n = static_cast<Eigen::Index>(model.dim());
  result.u.reserve(grid.size());
  result.u.push_back(ComplexMatrix::Identity(n, n));
  return result;
}

}  // namespace

std::vector<double> uniform_grid(double t0, double t1, std::size_t intervals) {
  if (intervals < 1) throw Error(ErrorKind::InvalidArgument, "need at least one interval");
  if (!(t1 > t0)) throw Error(ErrorKind::InvalidArgument, "t1 must exceed t0");
  std::vector<double> grid(intervals + 1);
  const double h = (t1 - t0) / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) grid[i] = t0 + static_cast<double>(i) * h;
  grid.back() = t1;
  return grid;
}

PropagatorResult propagate_fixed(const HamiltonianModel& model, std::span<const double> grid,
                                 std::size_t substeps, const Tolerances& tol) {
  tol.validate();
  check_grid(grid);
  if (substeps < 1) throw Error(ErrorKind::InvalidArgument, "substeps must be positive");
  const Rk4 rk(model, tol.hbar);
  PropagatorResult result = start(model, grid);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    result.u.push_back(rk.advance(result.u.back(), grid[i], grid[i + 1], substeps));
  }
  result.integrator.method = "rk4-fixed";
  result.integrator.step = (grid[1] - grid[0]) / static_cast<double>(substeps);
  result.integrator.substeps_total = substeps * (grid.size() - 1);
  return result;
}

PropagatorResult propagate(const HamiltonianModel& model, std::span<const double> grid, const Tolerances& tol) {
  tol.validate();
  check_grid(grid);
  const Rk4 rk(model, tol.hbar);
  PropagatorResult result = start(model, grid);
  const double span = grid.back() - grid.front();
  double smallest = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::size_t total = 0;
  std::size_t m = 1;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t0 = grid[i];
    const double t1 = grid[i + 1];
    const ComplexMatrix& u0 = result.u.back();
    while (true) {
      const double fine_step = (t1 - t0) / static_cast<double>(2 * m);
      if (fine_step < kMinRelativeStep * span || 2 * m > kMaxSubsteps) {
        throw Error(ErrorKind::StepUnderflow, "required step fell below 1e-12 of the interval");
      }
      const ComplexMatrix coarse = rk.advance(u0, t0, t1, m);
      ComplexMatrix fine = rk.advance(u0, t0, t1, 2 * m);
      const double estimate = max_norm(fine - coarse) / 15.0;
      const double allowed = tol.ode_tol * (1.0 + max_norm(fine));
      if (!std::isfinite(estimate)) {
        throw Error(ErrorKind::StepUnderflow, "propagation produced non-finite values");
      }
      if (estimate <= allowed) {
        smallest = std::min(smallest, fine_step);
        worst = std::max(worst, estimate);
        total += 2 * m;
        result.u.push_back(std::move(fine));
        if (estimate < allowed / 64.0 && m > 1) m /= 2;
        break;
      }
      m *= 2;
    }
  }
  result.integrator.method = "rk4-step-halving";
  result.integrator.step = smallest;
  result.integrator.error_estimate = worst;
  result.integrator.substeps_total = total;
  return result;
}

DefectSeries unitarity_defect(const PropagatorResult& result, const ComplexMatrix& eta) {
  DefectSeries out;
  out.values.reserve(result.u.size());
  for (const auto& u : result.u) {
    if (u.rows() != eta.rows() || eta.rows() != eta.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "metric size does not match the propagator");
    }
    const double d = max_norm(u.adjoint() * eta * u - eta);
    out.values.push_back(d);
    out.max = std::max(out.max, d);
  }
  return out;
}

XiFlow xi_flow(const HamiltonianModel& model, const PropagatorResult& result, const ComplexMatrix& xi0,
               const Tolerances& tol) {
  const PositivityReport pd = is_positive_definite(xi0, tol);
  if (!pd.positive_definite) throw Error(ErrorKind::NotPositiveDefinite, "initial metric is not positive-definite");
  if (static_cast<std::size_t>(xi0.rows()) != model.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "initial metric size does not match the model");
  }
  XiFlow flow;
  flow.xi.reserve(result.u.size());
  for (const auto& u : result.u) {
    const ComplexMatrix inv = u.partialPivLu().inverse();
    const ComplexMatrix xi = inv.adjoint() * xi0 * inv;
    flow.xi.push_back(0.5 * (xi + xi.adjoint()));
  }
  if (result.times.size() >= 3) {
    const double h = (result.times.back() - result.times.front()) / static_cast<double>(result.times.size() - 1);
    const auto dxi = differentiate<ComplexMatrix>(flow.xi, h);
    for (std::size_t i = 0; i < flow.xi.size(); ++i) {
      const ComplexMatrix hm = model.eval(result.times[i]);
      const double r = max_norm(hm.adjoint() * flow.xi[i] - flow.xi[i] * hm - kI * tol.hbar * dxi[i]);
      flow.residuals.push_back(r);
      flow.max_residual = std::max(flow.max_residual, r);
    }
  }
  return flow;
}

namespace {

void check_states(const PropagatorResult& result, const ComplexVector& psi0, const ComplexVector& phi0) {
  const auto n = result.u.empty() ? 0 : result.u.front().rows();
  if (psi0.size() != n || phi0.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "state size does not match the propagator");
  }
}

}  // namespace

std::vector<Complex> norm_history(const PropagatorResult& result, const ComplexVector& psi0,
                                  const ComplexVector& phi0, const ComplexMatrix& metric) {
  check_states(result, psi0, phi0);
  if (metric.rows() != psi0.size() || metric.cols() != psi0.size()) {
    throw Error(ErrorKind::DimensionMismatch, "metric size does not match the states");
  }
  std::vector<Complex> out;
  out.reserve(result.u.size());
  for (const auto& u : result.u) {
    const ComplexVector psi = u * psi0;
    const ComplexVector phi = u * phi0;
    out.push_back(psi.dot(metric * phi));
  }
  return out;
}

std::vector<Complex> norm_history(const PropagatorResult& result, const ComplexVector& psi0,
                                  const ComplexVector& phi0, std::span<const ComplexMatrix> metrics) {
  check_states(result, psi0, phi0);
  if (metrics.size() != result.u.size()) {
    throw Error(ErrorKind::DimensionMismatch, "metric series length does not match the propagator");
  }
  std::vector<Complex> out;
  out.reserve(result.u.size());
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const ComplexVector psi = result.u[i] * psi0;
    const ComplexVector phi = result.u[i] * phi0;
    out.push_back(psi.dot(metrics[i] * phi));
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_complex_series_csv(std::ostream& out, std::span<const double> times, std::span<const Complex> values) {
  if (times.size() != values.size()) throw Error(ErrorKind::DimensionMismatch, "series length mismatch");
  out << "t,re,im\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << format_number(times[i]) << ',' << format_number(values[i].real()) << ','
        << format_number(values[i].imag()) << '\n';
  }
}

void write_real_series_csv(std::ostream& out, std::span<const double> times, std::span<const double> values,
                           const std::string& column) {
  if (times.size() != values.size()) throw Error(ErrorKind::DimensionMismatch, "series length mismatch");
  out << "t," << column << '\n';
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << format_number(times[i]) << ',' << format_number(values[i]) << '\n';
  }
}

}  // namespace quasistat
