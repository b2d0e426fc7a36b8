#include "quasistat/two_level.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "quasistat/spectral.hpp"

namespace quasistat::two_level {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// |sin theta| below this counts as the chart boundary theta in {0, pi}.
constexpr double kChartEdge = 1e-12;

double wrap_two_pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

struct Split {
  double q;
  Complex a, b, c;
  double energy;
  double scale;
};

Split split(const ComplexMatrix& h, const Tolerances& tol) {
  if (h.rows() != 2 || h.cols() != 2) throw Error(ErrorKind::DimensionMismatch, "expected a 2x2 matrix");
  const double scale = std::max(1.0, max_norm(h));
  const double eps = tol.structural_tol;
  const Complex half_trace = 0.5 * (h(0, 0) + h(1, 1));
  if (std::abs(half_trace.imag()) > eps * scale) {
    throw Error(ErrorKind::ComplexSpectrum, "trace is not real");
  }
  Split s{half_trace.real(), h(0, 0) - half_trace.real(), h(0, 1), h(1, 0), 0.0, scale};
  const Complex e2 = s.a * s.a + s.b * s.c;
  if (std::abs(e2.imag()) > eps * scale * scale || e2.real() < -eps * scale * scale) {
    std::ostringstream os;
    os << "a^2 + bc = " << e2 << " is not a nonnegative real";
    throw Error(ErrorKind::ComplexSpectrum, os.str());
  }
  s.energy = std::sqrt(std::max(0.0, e2.real()));
  const double off = std::max({std::abs(s.a), std::abs(s.b), std::abs(s.c)});
  if (s.energy <= eps * scale) {
    if (off <= eps * scale) throw Error(ErrorKind::ScalarMatrix, "matrix is a multiple of the identity");
    throw Error(ErrorKind::NotDiagonalizable, "nonzero nilpotent traceless part");
  }
  return s;
}

// phi from e^{-i phi} sin(theta) E = b (or e^{i phi} sin(theta) E = c), on the
// branch nearest `reference` when given, else with Re(phi) in [0, 2 pi).
Complex solve_phi(const Split& s, Complex sin_theta, std::optional<Complex> reference) {
  const Complex denom = s.energy * sin_theta;
  Complex phi = std::abs(s.b) >= std::abs(s.c) ? kI * std::log(s.b / denom) : -kI * std::log(s.c / denom);
  if (reference) {
    phi += kTwoPi * std::round((reference->real() - phi.real()) / kTwoPi);
  } else {
    phi = {wrap_two_pi(phi.real()), phi.imag()};
  }
  return phi;
}

Decomposition finish(const Split& s, Complex theta, Complex phi) {
  Decomposition d;
  d.q = s.q;
  d.a = s.a;
  d.b = s.b;
  d.c = s.c;
  d.params.q = s.q;
  d.params.energy = s.energy;
  d.params.theta = theta;
  d.params.phi = phi;
  return d;
}

bool on_chart_edge(const Split& s, Complex sin_theta, const Tolerances& tol) {
  if (std::abs(sin_theta) > kChartEdge) return false;
  if (std::max(std::abs(s.b), std::abs(s.c)) > tol.structural_tol * s.scale) {
    throw Error(ErrorKind::OutsideChart,
                "theta is 0 or pi but the off-diagonal part is nonzero; not representable in the chart");
  }
  return true;
}

}  // namespace

Decomposition decompose(const ComplexMatrix& h, const Tolerances& tol) {
  const Split s = split(h, tol);
  const Complex theta = std::acos(s.a / s.energy);
  const Complex sin_theta = std::sin(theta);
  const Complex phi = on_chart_edge(s, sin_theta, tol) ? Complex{} : solve_phi(s, sin_theta, std::nullopt);
  return finish(s, theta, phi);
}

Decomposition decompose_near(const ComplexMatrix& h, const TwoLevelParams& previous, const Tolerances& tol) {
  const Split s = split(h, tol);
  const Complex principal = std::acos(s.a / s.energy);

  double best_cost = std::numeric_limits<double>::infinity();
  Complex best_theta, best_phi;
  for (double sign : {1.0, -1.0}) {
    Complex theta = sign * principal;
    theta += kTwoPi * std::round((previous.theta.real() - theta.real()) / kTwoPi);
    const Complex sin_theta = std::sin(theta);
    const bool edge = on_chart_edge(s, sin_theta, tol);
    const Complex phi = edge ? previous.phi : solve_phi(s, sin_theta, previous.phi);
    const double cost = std::abs(theta - previous.theta) + std::abs(phi - previous.phi);
    if (cost < best_cost) {
      best_cost = cost;
      best_theta = theta;
      best_phi = phi;
    }
  }
  const double dtheta = std::abs(best_theta - previous.theta);
  const double dphi = std::abs(best_phi - previous.phi);
  if (dtheta > kPi / 2 || dphi > kPi / 2) {
    std::ostringstream os;
    os << "branch jump |d theta| = " << dtheta << ", |d phi| = " << dphi << "; refine the grid";
    throw Error(ErrorKind::BranchTrackingFailure, os.str());
  }
  Decomposition d = finish(s, best_theta, best_phi);
  d.params.n1 = previous.n1;
  d.params.n2 = previous.n2;
  return d;
}

ComplexMatrix compose(const TwoLevelParams& p) {
  const Complex c = std::cos(p.theta);
  const Complex sn = std::sin(p.theta);
  ComplexMatrix h(2, 2);
  h(0, 0) = p.q + p.energy * c;
  h(0, 1) = p.energy * std::exp(-kI * p.phi) * sn;
  h(1, 0) = p.energy * std::exp(kI * p.phi) * sn;
  h(1, 1) = p.q - p.energy * c;
  return h;
}

Eigenvectors eigvecs(const TwoLevelParams& p) {
  const Complex half = 0.5 * p.theta;
  const Complex half_conj = std::conj(half);
  const Complex e = std::exp(kI * p.phi);
  const Complex e_conj = std::exp(kI * std::conj(p.phi));
  Eigenvectors v;
  v.psi1 = Vector2(std::cos(half), e * std::sin(half)) / std::conj(p.n1);
  v.psi2 = Vector2(std::sin(half), -e * std::cos(half)) / std::conj(p.n2);
  v.phi1 = p.n1 * Vector2(std::cos(half_conj), e_conj * std::sin(half_conj));
  v.phi2 = p.n2 * Vector2(std::sin(half_conj), -e_conj * std::cos(half_conj));
  return v;
}

MetricTerms metric_terms(const TwoLevelParams& p, double k, double u) {
  if (!(k > 0.0) || !(u > 0.0)) throw Error(ErrorKind::InvalidArgument, "k and u must be positive");
  const Complex half = 0.5 * p.theta;
  MetricTerms m;
  m.k = k;
  m.u = u;
  m.a = std::norm(std::cos(half));
  m.b = std::norm(std::sin(half));
  m.zeta = std::sin(half) * std::cos(std::conj(half));
  // Expanding sum |phi_n><phi_n| gives the prefactor e^{i phi*}; it reduces to
  // e^{i phi} only for real phi.
  m.lambda = std::exp(kI * std::conj(p.phi)) * (u * std::conj(m.zeta) - m.zeta);
  m.r = std::exp(2.0 * p.phi.imag()) * (m.a + m.b * u);
  m.s = m.a * u + m.b;
  const double w1 = std::norm(p.n1);
  const double w2 = std::norm(p.n2);
  m.nu1 = 0.5 * std::log(w1);
  m.nu2 = 0.5 * std::log(w2);
  m.mu = (w1 - w2) / (w1 + w2);
  return m;
}

ComplexMatrix metric_closed_form(const TwoLevelParams& p, double k, double u) {
  const MetricTerms m = metric_terms(p, k, u);
  ComplexMatrix eta(2, 2);
  eta(0, 0) = m.s;
  eta(0, 1) = std::conj(m.lambda);
  eta(1, 0) = m.lambda;
  eta(1, 1) = m.r;
  return k * eta;
}

TwoLevelParams normalization_from_metric(const TwoLevelParams& p, const ComplexMatrix& eta, const Tolerances& tol) {
  if (eta.rows() != 2 || eta.cols() != 2) throw Error(ErrorKind::DimensionMismatch, "expected a 2x2 metric");
  TwoLevelParams unit = p;
  unit.n1 = unit.n2 = 1.0;
  const Eigenvectors v = eigvecs(unit);
  const ComplexMatrix g1 = v.phi1 * v.phi1.adjoint();
  const ComplexMatrix g2 = v.phi2 * v.phi2.adjoint();
  Eigen::Matrix<double, 8, 2> a;
  Eigen::Matrix<double, 8, 1> rhs;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const int row = 2 * (2 * i + j);
      a(row, 0) = g1(i, j).real();
      a(row, 1) = g2(i, j).real();
      a(row + 1, 0) = g1(i, j).imag();
      a(row + 1, 1) = g2(i, j).imag();
      rhs(row) = eta(i, j).real();
      rhs(row + 1) = eta(i, j).imag();
    }
  }
  const Eigen::Vector2d w = a.colPivHouseholderQr().solve(rhs);
  const double misfit = (a * w - rhs).cwiseAbs().maxCoeff();
  if (misfit > 1e3 * tol.structural_tol * std::max(1.0, max_norm(eta))) {
    std::ostringstream os;
    os << "metric is not a combination of the left eigenprojectors (misfit " << misfit << ")";
    throw Error(ErrorKind::NotPseudoHermitian, os.str());
  }
  if (!(w(0) > 0.0) || !(w(1) > 0.0)) {
    throw Error(ErrorKind::NotPositiveDefinite, "metric weights are not positive");
  }
  TwoLevelParams out = p;
  auto phase = [](Complex n) { return std::abs(n) > 0.0 ? n / std::abs(n) : Complex{1.0, 0.0}; };
  out.n1 = std::sqrt(w(0)) * phase(p.n1);
  out.n2 = std::sqrt(w(1)) * phase(p.n2);
  return out;
}

std::array<double, 4> qs_residual(const TwoLevelParams& p, const Rates& d) {
  const Complex half = 0.5 * p.theta;
  const double w1 = std::norm(p.n1);
  const double w2 = std::norm(p.n2);
  const double mu = (w1 - w2) / (w1 + w2);
  const Complex sin_phi_dot = std::sin(p.theta) * d.phi_dot;
  const Complex s = std::sin(half);
  const Complex c = std::cos(half);
  return {
      (s * s * d.phi_dot).imag() + d.nu1_dot,
      (c * c * d.phi_dot).imag() + d.nu2_dot,
      d.theta_dot.imag() - mu * sin_phi_dot.real(),
      mu * d.theta_dot.real() + sin_phi_dot.imag(),
  };
}

namespace {

ResidualSeries collect(std::span<const TwoLevelParams> path, std::span<const Rates> rates) {
  ResidualSeries out;
  out.values.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto r = qs_residual(path[i], rates[i]);
    for (double v : r) out.max_abs = std::max(out.max_abs, std::abs(v));
    out.values.push_back(r);
  }
  return out;
}

double uniform_step(std::span<const double> times) {
  if (times.size() < 3) throw Error(ErrorKind::GridTooCoarse, "at least three grid points are required");
  const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid must be increasing");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - h) > 1e-6 * h) {
      throw Error(ErrorKind::InvalidArgument, "grid must be uniform");
    }
  }
  return h;
}

}  // namespace

ResidualSeries qs_residuals(std::span<const double> times, std::span<const TwoLevelParams> path) {
  if (times.size() != path.size()) throw Error(ErrorKind::DimensionMismatch, "times and path differ in length");
  const double h = uniform_step(times);
  std::vector<Complex> theta, phi;
  std::vector<double> nu1, nu2;
  for (const auto& p : path) {
    theta.push_back(p.theta);
    phi.push_back(p.phi);
    nu1.push_back(std::log(std::abs(p.n1)));
    nu2.push_back(std::log(std::abs(p.n2)));
  }
  const auto dtheta = differentiate<Complex>(theta, h);
  const auto dphi = differentiate<Complex>(phi, h);
  const auto dnu1 = differentiate<double>(nu1, h);
  const auto dnu2 = differentiate<double>(nu2, h);
  std::vector<Rates> rates;
  rates.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) rates.push_back({dtheta[i], dphi[i], dnu1[i], dnu2[i]});
  return collect(path, rates);
}

ResidualSeries qs_residuals(std::span<const TwoLevelParams> path, std::span<const Rates> rates) {
  if (path.size() != rates.size()) throw Error(ErrorKind::DimensionMismatch, "path and rates differ in length");
  if (path.size() < 3) throw Error(ErrorKind::GridTooCoarse, "at least three grid points are required");
  return collect(path, rates);
}

std::vector<TwoLevelParams> track_parameters(std::span<const ComplexMatrix> samples, const Tolerances& tol) {
  std::vector<TwoLevelParams> out;
  if (samples.empty()) return out;
  out.reserve(samples.size());
  out.push_back(decompose(samples[0], tol).params);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    out.push_back(decompose_near(samples[i], out.back(), tol).params);
  }
  return out;
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::QuasiStationaryCase1: return "QuasiStationaryCase1";
    case Verdict::QuasiStationaryCase2: return "QuasiStationaryCase2";
    case Verdict::TrivialFamily: return "TrivialFamily";
    case Verdict::NotQuasiStationary: return "NotQuasiStationary";
    case Verdict::NotRealDiagonalizable: return "NotRealDiagonalizable";
  }
  return "Unknown";
}

namespace {

struct Sampled {
  std::vector<ComplexMatrix> h;
  std::vector<double> q;
  std::vector<Complex> a, b, c;
  double scale = 1.0;
};

ComplexMatrix normalized(const ComplexMatrix& m) {
  return m * (static_cast<double>(m.rows()) / m.trace().real());
}

// H0(t) = g(t) H0(t0) with real g: time-independent eigenvectors.
bool trivial_family(const Sampled& s, const Tolerances& tol, Diagnostics& diag) {
  const ComplexMatrix ref = s.h[0] - s.q[0] * ComplexMatrix::Identity(2, 2);
  const double ref_norm2 = ref.squaredNorm();
  diag.fitted_f.clear();
  double worst = 0.0;
  for (std::size_t i = 0; i < s.h.size(); ++i) {
    const ComplexMatrix h0 = s.h[i] - s.q[i] * ComplexMatrix::Identity(2, 2);
    const double g = (ref.adjoint() * h0).trace().real() / ref_norm2;
    worst = std::max(worst, max_norm(h0 - g * ref) / s.scale);
    diag.fitted_f.push_back(g);
  }
  diag.trivial_residual = worst;
  return worst <= tol.structural_tol;
}

// Case 1: diagonal metric. Im a(t) = 0 and c(t) = rho b(t)* with rho = e^{-2 Im phi(t0)}.
std::optional<ComplexMatrix> case1(const Sampled& s, const TwoLevelParams& p0, const Tolerances& tol,
                                   Diagnostics& diag) {
  const double eps = tol.structural_tol * s.scale;
  double rho = -1.0;
  for (std::size_t i = 0; i < s.b.size(); ++i) {
    if (std::abs(s.b[i]) > eps) {
      rho = std::abs(s.c[i] / s.b[i]);
      break;
    }
  }
  if (rho <= 0.0) {
    diag.failing_condition = "case 1: b(t) vanishes on the whole grid";
    return std::nullopt;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < s.h.size(); ++i) {
    worst = std::max(worst, std::abs(s.a[i].imag()));
    worst = std::max(worst, std::abs(s.c[i] - rho * std::conj(s.b[i])));
  }
  diag.case1_residual = worst / s.scale;
  if (worst > eps) {
    diag.failing_condition = "case 1: c(t) != e^{-2 Im phi(0)} b(t)* or Im a(t) != 0";
    return std::nullopt;
  }
  TwoLevelParams gauge = p0;
  gauge.n1 = gauge.n2 = 1.0;
  if (std::abs(std::sin(p0.theta)) <= kChartEdge) {
    // phi(t0) is free on the chart edge; fix it by the observed ratio.
    gauge.phi = {p0.phi.real(), -0.5 * std::log(rho)};
  }
  return metric_closed_form(gauge, 1.0, 1.0);
}

struct Case2Fit {
  double u;
  Complex lambda;
  double r, s;
};

// Case 2: fit u from Im(lambda b) = r Im a (falling back to the complex
// off-diagonal relation when that is uninformative), then verify both relations.
std::optional<Case2Fit> case2(const Sampled& smp, const TwoLevelParams& p0, const Tolerances& tol,
                              Diagnostics& diag) {
  const double eps = tol.structural_tol * smp.scale;
  const Complex half = 0.5 * p0.theta;
  const double a0 = std::norm(std::cos(half));
  const double b0 = std::norm(std::sin(half));
  const Complex zeta = std::sin(half) * std::cos(std::conj(half));
  const Complex pre = std::exp(kI * std::conj(p0.phi));
  const Complex lam1 = pre * std::conj(zeta);  // lambda(u) = u lam1 + lam0
  const Complex lam0 = -pre * zeta;
  const double growth = std::exp(2.0 * p0.phi.imag());
  const double r0 = growth * a0, r1 = growth * b0;  // r(u) = r0 + r1 u
  const double s0 = b0, s1 = a0;                    // s(u) = s0 + s1 u

  // First relation: u * x1 + x0 = 0 (real), per sample.
  double xx = 0.0, xy = 0.0;
  for (std::size_t i = 0; i < smp.h.size(); ++i) {
    const double x1 = (lam1 * smp.b[i]).imag() - r1 * smp.a[i].imag();
    const double x0 = (lam0 * smp.b[i]).imag() - r0 * smp.a[i].imag();
    xx += x1 * x1;
    xy += x1 * x0;
  }
  double u = 0.0;
  if (std::sqrt(xx) > eps * std::sqrt(static_cast<double>(smp.h.size()))) {
    u = -xy / xx;
  } else {
    // Second relation: s b = 2 lambda* Re a + r c*, i.e. u * y1 + y0 = 0 (complex).
    double yy = 0.0, yz = 0.0;
    for (std::size_t i = 0; i < smp.h.size(); ++i) {
      const Complex y1 = s1 * smp.b[i] - 2.0 * std::conj(lam1) * smp.a[i].real() - r1 * std::conj(smp.c[i]);
      const Complex y0 = s0 * smp.b[i] - 2.0 * std::conj(lam0) * smp.a[i].real() - r0 * std::conj(smp.c[i]);
      yy += std::norm(y1);
      yz += (std::conj(y1) * y0).real();
    }
    if (!(yy > 0.0)) {
      diag.failing_condition = "case 2: u is not determined by the samples";
      return std::nullopt;
    }
    u = -yz / yy;
  }
  if (!(u > 0.0) || !std::isfinite(u)) {
    std::ostringstream os;
    os << "case 2: fitted u = " << u << " is not positive";
    diag.failing_condition = os.str();
    return std::nullopt;
  }
  Case2Fit fit{u, u * lam1 + lam0, r0 + r1 * u, s0 + s1 * u};
  if (std::abs(fit.lambda) <= eps) {
    diag.failing_condition = "case 2: lambda(0) vanishes for the fitted u";
    return std::nullopt;
  }

  diag.fitted_f.clear();
  const double lam_norm2 = std::norm(fit.lambda);
  double worst = 0.0;
  for (std::size_t i = 0; i < smp.h.size(); ++i) {
    const double f = (fit.lambda * smp.b[i]).real();
    diag.fitted_f.push_back(f);
    const double re_a = smp.a[i].real();
    const double im_a = smp.a[i].imag();
    const Complex b_model = (f + kI * fit.r * im_a) / fit.lambda;
    const Complex c_model = (fit.s * f - 2.0 * lam_norm2 * re_a - kI * fit.r * fit.s * im_a) /
                            (fit.r * std::conj(fit.lambda));
    worst = std::max({worst, std::abs(smp.b[i] - b_model), std::abs(smp.c[i] - c_model)});
  }
  diag.case2_residual = worst / smp.scale;
  if (worst > eps * std::max({1.0, u, 1.0 / u})) {
    diag.failing_condition = "case 2: b(t), c(t) do not follow the real-function form for any u";
    return std::nullopt;
  }
  return fit;
}

void cross_check(Classification& out, const Sampled& s, const Tolerances& tol) {
  auto& d = out.diagnostics;
  const MetricSolution sol = constant_metric_space(s.h, tol);
  d.solver_dim = sol.solution_dim;
  d.solver_has_positive_member = sol.pd_witness.has_value();
  switch (out.verdict) {
    case Verdict::QuasiStationaryCase1:
    case Verdict::QuasiStationaryCase2: {
      d.cross_check_agrees = sol.solution_dim == 1 && sol.pd_witness;
      if (d.cross_check_agrees && out.metric) {
        const double gap = max_norm(normalized(*out.metric) - normalized(*sol.pd_witness));
        d.cross_check_agrees = gap <= 1e-6;
        if (!d.cross_check_agrees) {
          std::ostringstream os;
          os << "metric differs from the solver witness by " << gap;
          d.cross_check_note = os.str();
        }
      }
      break;
    }
    case Verdict::TrivialFamily:
      d.cross_check_agrees = sol.solution_dim == 2 && sol.pd_witness;
      break;
    case Verdict::NotQuasiStationary:
      d.cross_check_agrees = !sol.pd_witness;
      break;
    case Verdict::NotRealDiagonalizable:
      d.cross_check_agrees = true;
      break;
  }
  if (!d.cross_check_agrees && d.cross_check_note.empty()) {
    std::ostringstream os;
    os << "solver reports solution_dim = " << sol.solution_dim
       << (sol.pd_witness ? " with" : " without") << " a positive member";
    d.cross_check_note = os.str();
  }
}

}  // namespace

Classification classify(const HamiltonianModel& model, std::span<const double> grid, const Tolerances& tol) {
  tol.validate();
  if (model.dim() != 2) throw Error(ErrorKind::DimensionMismatch, "classify needs a 2x2 model");
  if (grid.size() < 3) throw Error(ErrorKind::GridTooCoarse, "classify needs at least three grid points");

  Classification out;
  Sampled s;
  for (double t : grid) {
    s.h.push_back(model.eval(t));
    s.scale = std::max(s.scale, max_norm(s.h.back()));
  }

  for (std::size_t i = 0; i < s.h.size(); ++i) {
    const RealDiscreteReport report = real_discrete_check(s.h[i], tol);
    if (!report.diagonalizable || !report.spectrum_real) {
      std::ostringstream os;
      os << "t = " << grid[i] << ": " << (report.diagonalizable ? "spectrum not real" : "not diagonalizable");
      out.verdict = Verdict::NotRealDiagonalizable;
      out.diagnostics.failing_condition = os.str();
      cross_check(out, s, tol);
      return out;
    }
  }
  for (const auto& h : s.h) {
    const double q = 0.5 * (h(0, 0) + h(1, 1)).real();
    s.q.push_back(q);
    s.a.push_back(h(0, 0) - q);
    s.b.push_back(h(0, 1));
    s.c.push_back(h(1, 0));
  }
  if (max_norm(s.h[0] - s.q[0] * ComplexMatrix::Identity(2, 2)) <= tol.structural_tol * s.scale) {
    throw Error(ErrorKind::ScalarMatrix, "the Hamiltonian at the reference time is a multiple of the identity");
  }

  if (trivial_family(s, tol, out.diagnostics)) {
    out.verdict = Verdict::TrivialFamily;
    out.u_fixed = false;
    cross_check(out, s, tol);
    return out;
  }

  const std::vector<TwoLevelParams> path = track_parameters(s.h, tol);
  const TwoLevelParams& p0 = path.front();

  bool diagonal_real = true;
  for (const auto& h : s.h) {
    diagonal_real = diagonal_real && std::abs(h(0, 0).imag()) <= tol.structural_tol * s.scale &&
                    std::abs(h(1, 1).imag()) <= tol.structural_tol * s.scale;
  }
  if (diagonal_real) {
    if (auto metric = case1(s, p0, tol, out.diagnostics)) {
      out.verdict = Verdict::QuasiStationaryCase1;
      out.u_fixed = true;
      out.u = 1.0;
      out.metric = std::move(metric);
      out.diagnostics.failing_condition.clear();
      cross_check(out, s, tol);
      return out;
    }
  }
  const std::string case1_failure = out.diagnostics.failing_condition;
  if (auto fit = case2(s, p0, tol, out.diagnostics)) {
    TwoLevelParams unit = p0;
    unit.n1 = unit.n2 = 1.0;
    out.verdict = Verdict::QuasiStationaryCase2;
    out.u_fixed = true;
    out.u = fit->u;
    out.metric = metric_closed_form(unit, 1.0, fit->u);
    out.diagnostics.failing_condition.clear();
    cross_check(out, s, tol);
    return out;
  }
  if (!case1_failure.empty()) {
    out.diagnostics.failing_condition = case1_failure + "; " + out.diagnostics.failing_condition;
  }
  out.verdict = Verdict::NotQuasiStationary;
  cross_check(out, s, tol);
  return out;
}

std::string to_json(const Classification& c) {
  using nlohmann::json;
  json doc;
  doc["verdict"] = to_string(c.verdict);
  if (c.u_fixed) {
    doc["u_constraint"] = {{"kind", "fixed"}, {"u", c.u}};
  } else {
    doc["u_constraint"] = {{"kind", "free"}};
  }
  if (c.metric) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < c.metric->rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < c.metric->cols(); ++j) {
        row.push_back({{"re", (*c.metric)(i, j).real()}, {"im", (*c.metric)(i, j).imag()}});
      }
      rows.push_back(std::move(row));
    }
    doc["metric"] = std::move(rows);
  } else {
    doc["metric"] = nullptr;
  }
  const auto& d = c.diagnostics;
  doc["diagnostics"] = {
      {"failing_condition", d.failing_condition},
      {"trivial_residual", d.trivial_residual},
      {"case1_residual", d.case1_residual},
      {"case2_residual", d.case2_residual},
      {"fitted_f", d.fitted_f},
      {"solver_dim", d.solver_dim},
      {"solver_has_positive_member", d.solver_has_positive_member},
      {"cross_check_agrees", d.cross_check_agrees},
      {"cross_check_note", d.cross_check_note},
  };
  return doc.dump(2) + "\n";
}

}  // namespace quasistat::two_level
