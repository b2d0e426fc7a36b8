#include "quasistat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace quasistat::geometry {

namespace {

double uniform_step(std::span<const double> times) {
  if (times.size() < 3) throw Error(ErrorKind::GridTooCoarse, "a path needs at least three samples");
  const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "path times must be increasing");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - h) > 1e-6 * h) {
      throw Error(ErrorKind::InvalidArgument, "path times must be uniform");
    }
  }
  return h;
}

// Unwrapped argument along a sequence of nonzero complex numbers.
std::vector<double> unwrapped_phase(const std::vector<Complex>& z) {
  std::vector<double> out;
  out.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    double a = std::arg(z[i]);
    if (i > 0) a += 2.0 * std::numbers::pi * std::round((out.back() - a) / (2.0 * std::numbers::pi));
    out.push_back(a);
  }
  return out;
}

}  // namespace

ParameterPath make_path(std::span<const double> times, std::span<const TwoLevelParams> params, const Tolerances& tol) {
  if (times.size() != params.size()) throw Error(ErrorKind::DimensionMismatch, "times and params differ in length");
  uniform_step(times);
  ParameterPath path;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) {
      const double dtheta = std::abs(params[i].theta - params[i - 1].theta);
      const double dphi = std::abs(params[i].phi - params[i - 1].phi);
      if (dtheta >= std::numbers::pi / 2 || dphi >= std::numbers::pi / 2) {
        std::ostringstream os;
        os << "samples " << i - 1 << " and " << i << " are not branch-continuous";
        throw Error(ErrorKind::BranchTrackingFailure, os.str());
      }
    }
    path.samples.push_back({times[i], params[i]});
  }
  const ComplexMatrix first = two_level::compose(params.front());
  const ComplexMatrix last = two_level::compose(params.back());
  path.closed = max_norm(first - last) <= tol.structural_tol * std::max(1.0, max_norm(first));
  return path;
}

ParameterPath path_from_model(const HamiltonianModel& model, std::span<const double> grid, const Tolerances& tol,
                              const std::optional<ComplexMatrix>& metric) {
  if (model.dim() != 2) throw Error(ErrorKind::DimensionMismatch, "parameter paths need a 2x2 model");
  std::vector<ComplexMatrix> samples;
  samples.reserve(grid.size());
  for (double t : grid) samples.push_back(model.eval(t));
  std::vector<TwoLevelParams> params = two_level::track_parameters(samples, tol);
  if (metric) {
    for (auto& p : params) p = two_level::normalization_from_metric(p, *metric, tol);
  }
  return make_path(grid, params, tol);
}

ParameterPath reversed(const ParameterPath& path) {
  ParameterPath out = path;
  const std::size_t n = path.samples.size();
  for (std::size_t i = 0; i < n; ++i) out.samples[i].params = path.samples[n - 1 - i].params;
  return out;
}

ConnectionSeries connection(const ParameterPath& path, Gauge gauge) {
  const std::size_t count = path.samples.size();
  if (count < 3) throw Error(ErrorKind::GridTooCoarse, "connection needs at least three samples");
  std::vector<double> times;
  for (const auto& s : path.samples) times.push_back(s.t);
  const double h = uniform_step(times);

  // Unit-normalized vectors v_a (right) and w_a (left); the n_a factors are
  // handled separately so the gauge can be chosen.
  std::vector<ComplexVector> v1, v2, w1, w2;
  for (const auto& s : path.samples) {
    TwoLevelParams unit = s.params;
    unit.n1 = unit.n2 = 1.0;
    const auto e = two_level::eigvecs(unit);
    v1.emplace_back(e.psi1);
    v2.emplace_back(e.psi2);
    w1.emplace_back(e.phi1);
    w2.emplace_back(e.phi2);
  }
  const bool periodic = path.closed && (v1.front() - v1.back()).cwiseAbs().maxCoeff() <= 1e-9 &&
                        (v2.front() - v2.back()).cwiseAbs().maxCoeff() <= 1e-9;
  const auto dv1 = differentiate<ComplexVector>(v1, h, periodic);
  const auto dv2 = differentiate<ComplexVector>(v2, h, periodic);

  // <w_m | dv_n>
  std::vector<Eigen::Matrix2cd> inner(count);
  for (std::size_t i = 0; i < count; ++i) {
    inner[i](0, 0) = w1[i].dot(dv1[i]);
    inner[i](0, 1) = w1[i].dot(dv2[i]);
    inner[i](1, 0) = w2[i].dot(dv1[i]);
    inner[i](1, 1) = w2[i].dot(dv2[i]);
  }

  // ln n_a = nu_a + i alpha_a and their rates.
  std::vector<double> nu[2], dnu[2], dalpha[2];
  {
    std::vector<Complex> n[2];
    for (const auto& s : path.samples) {
      n[0].push_back(s.params.n1);
      n[1].push_back(s.params.n2);
    }
    for (int a = 0; a < 2; ++a) {
      const std::vector<double> alpha = unwrapped_phase(n[a]);
      dalpha[a] = differentiate<double>(alpha, h);
      if (gauge == Gauge::Raw) {
        for (const auto& z : n[a]) nu[a].push_back(std::log(std::abs(z)));
        dnu[a] = differentiate<double>(nu[a], h);
      } else {
        // nu_a' = Im(i <w_a|dv_a>) makes Im A_aa vanish; integrate from the first sample.
        dnu[a].resize(count);
        for (std::size_t i = 0; i < count; ++i) dnu[a][i] = (kI * inner[i](a, a)).imag();
        nu[a].resize(count);
        nu[a][0] = std::log(std::abs(n[a][0]));
        for (std::size_t i = 1; i < count; ++i) nu[a][i] = nu[a][i - 1] + 0.5 * h * (dnu[a][i - 1] + dnu[a][i]);
      }
    }
  }

  ConnectionSeries out;
  out.times = times;
  out.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    // conj(n_m) / conj(n_n) = exp(nu_m - nu_n) exp(-i (alpha_m - alpha_n)); only
    // the modulus ratio and phase difference matter.
    const Complex n1 = std::polar(std::exp(nu[0][i]), std::arg(path.samples[i].params.n1));
    const Complex n2 = std::polar(std::exp(nu[1][i]), std::arg(path.samples[i].params.n2));
    const Complex n_conj[2] = {std::conj(n1), std::conj(n2)};
    for (int m = 0; m < 2; ++m) {
      for (int n = 0; n < 2; ++n) {
        Complex value = inner[i](m, n);
        if (m == n) value -= Complex(dnu[n][i], -dalpha[n][i]);
        out.values[i](m, n) = kI * (n_conj[m] / n_conj[n]) * value;
      }
    }
  }
  return out;
}

double hermiticity_defect(const ConnectionSeries& a) {
  double worst = 0.0;
  for (const auto& m : a.values) worst = std::max(worst, (m - m.adjoint()).cwiseAbs().maxCoeff());
  return worst;
}

Complex geometric_phase(const ParameterPath& path, std::size_t level, Gauge gauge) {
  if (level > 1) throw Error(ErrorKind::InvalidArgument, "two-level systems have levels 0 and 1");
  if (!path.closed) throw Error(ErrorKind::NotClosed, "geometric phases need a closed loop");
  const ConnectionSeries a = connection(path, gauge);
  const auto idx = static_cast<Eigen::Index>(level);
  Complex sum{};
  for (std::size_t i = 0; i + 1 < a.values.size(); ++i) {
    const double dt = a.times[i + 1] - a.times[i];
    sum += 0.5 * dt * (a.values[i](idx, idx) + a.values[i + 1](idx, idx));
  }
  return sum;
}

}  // namespace quasistat::geometry
