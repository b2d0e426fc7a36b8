#include <algorithm>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

#include "quasistat/error.hpp"
#include "quasistat/spectral.hpp"
#include "quasistat/two_level.hpp"

using namespace quasistat;
using namespace quasistat::two_level;
using namespace qs_test;

namespace {

ComplexMatrix m2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

/// Random 2x2 with real, well separated spectrum and generic eigenvectors.
ComplexMatrix random_real_spectrum() {
  const double q = uniform(-2.0, 2.0);
  const double e = uniform(0.2, 3.0);
  ComplexMatrix v = random_matrix(2) + 1.5 * ComplexMatrix::Identity(2, 2);
  Eigen::Vector2cd d(q + e, q - e);
  return v * d.asDiagonal() * v.inverse();
}

SpectralData spectral_of(const TwoLevelParams& p) {
  const Eigenvectors v = eigvecs(p);
  SpectralData d;
  d.eigenvalues = {p.q + p.energy, p.q - p.energy};
  d.right_vectors = {v.psi1, v.psi2};
  d.left_vectors = {v.phi1, v.phi2};
  return d;
}

const std::vector<double> kLoop = linspace(0.0, 2.0 * pi, 400);

}  // namespace

TEST_CASE("decompose examples") {
  const Tolerances tol;
  const Decomposition d = decompose(m2(1, 0, 0, -1), tol);
  CHECK(d.q == 0.0);
  CHECK(d.params.energy == doctest::Approx(1.0));
  CHECK(std::abs(d.params.theta) < 1e-12);
  CHECK(d.params.phi == Complex(0.0, 0.0));

  const Decomposition e = decompose(m2(0, 2, 0.5, 0), tol);
  CHECK(e.params.energy == doctest::Approx(1.0));
  CHECK(std::abs(e.params.theta - pi / 2) < 1e-12);
  CHECK(std::abs(e.params.phi - Complex(0.0, std::log(2.0))) < 1e-12);
  CHECK(std::abs(std::exp(-Complex(0.0, 1.0) * e.params.phi) - 2.0) < 1e-12);
}

TEST_CASE("decompose reports q + E and q - E") {
  const Tolerances tol;
  for (int trial = 0; trial < 1000; ++trial) {
    const ComplexMatrix h = trial % 2 ? random_real_spectrum() : compose(random_params());
    const Decomposition d = decompose(h, tol);
    Eigen::Vector2cd ev = Eigen::ComplexEigenSolver<ComplexMatrix>(h).eigenvalues();
    std::vector<double> direct = {ev(0).real(), ev(1).real()};
    std::sort(direct.begin(), direct.end());
    CHECK(std::abs(d.q + d.params.energy - direct[1]) < 1e-10);
    CHECK(std::abs(d.q - d.params.energy - direct[0]) < 1e-10);
    CHECK(d.params.theta.real() >= 0.0);
    CHECK(d.params.theta.real() <= pi);
    CHECK(d.params.phi.real() >= 0.0);
    CHECK(d.params.phi.real() < 2.0 * pi);
  }
}

TEST_CASE("compose inverts decompose") {
  const Tolerances tol;
  for (int trial = 0; trial < 1000; ++trial) {
    const ComplexMatrix h = random_real_spectrum();
    CHECK(max_abs(compose(decompose(h, tol).params) - h) < tol.structural_tol * std::max(1.0, max_abs(h)) * 10);
  }
}

TEST_CASE("decompose errors") {
  const Tolerances tol;
  CHECK(kind_of([&] { decompose(m2(0, 1, -1, 0), tol); }) == ErrorKind::ComplexSpectrum);
  CHECK(kind_of([&] { decompose(m2(Complex(0, 1), 0, 0, 0), tol); }) == ErrorKind::ComplexSpectrum);
  CHECK(kind_of([&] { decompose(m2(3, 0, 0, 3), tol); }) == ErrorKind::ScalarMatrix);
  CHECK(kind_of([&] { decompose(m2(0, 1, 0, 0), tol); }) == ErrorKind::NotDiagonalizable);
  CHECK(kind_of([&] { decompose(m2(1, 1, 0, -1), tol); }) == ErrorKind::OutsideChart);
  CHECK(kind_of([&] { decompose(ComplexMatrix::Identity(3, 3), tol); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("compose examples") {
  TwoLevelParams p;
  p.energy = 1.0;
  p.theta = pi / 2;
  CHECK(max_abs(compose(p) - m2(0, 1, 1, 0)) < 1e-15);
  p.phi = Complex(0.0, std::log(2.0));
  CHECK(max_abs(compose(p) - m2(0, 2, 0.5, 0)) < 1e-15);
  TwoLevelParams scalar;
  scalar.q = 1.0;
  scalar.energy = 0.0;
  scalar.theta = 0.4;
  CHECK(max_abs(compose(scalar) - ComplexMatrix::Identity(2, 2)) < 1e-15);
}

TEST_CASE("eigvecs examples") {
  TwoLevelParams p;
  p.energy = 1.0;
  Eigenvectors v = eigvecs(p);
  CHECK(max_abs(v.psi1 - Eigen::Vector2cd(1, 0)) < 1e-15);
  CHECK(max_abs(v.psi2 - Eigen::Vector2cd(0, -1)) < 1e-15);
  CHECK(max_abs(v.phi1 - v.psi1) < 1e-15);
  CHECK(max_abs(v.phi2 - v.psi2) < 1e-15);

  p.theta = pi / 2;
  v = eigvecs(p);
  const double r = std::cos(pi / 4);
  CHECK(max_abs(v.psi1 - Eigen::Vector2cd(r, r)) < 1e-15);
  CHECK(std::abs(v.phi1.dot(v.psi1) - 1.0) < 1e-15);
  CHECK(std::abs(v.phi1.dot(v.psi2)) < 1e-15);

  p.theta = Complex(0.0, 1.0);
  v = eigvecs(p);
  CHECK(std::abs(v.phi1.dot(v.psi2)) < 1e-15);
  CHECK(std::abs(v.phi2.dot(v.psi1)) < 1e-15);
}

TEST_CASE("eigvecs form a biorthonormal eigensystem") {
  for (int trial = 0; trial < 1000; ++trial) {
    const TwoLevelParams p = random_params();
    const ComplexMatrix h = compose(p);
    const Eigenvectors v = eigvecs(p);
    const double e1 = p.q + p.energy;
    const double e2 = p.q - p.energy;
    CHECK(max_abs(h * v.psi1 - e1 * v.psi1) < 1e-10 * (1 + max_abs(h)) * (1 + v.psi1.norm()));
    CHECK(max_abs(h * v.psi2 - e2 * v.psi2) < 1e-10 * (1 + max_abs(h)) * (1 + v.psi2.norm()));
    CHECK(max_abs(h.adjoint() * v.phi1 - e1 * v.phi1) < 1e-10 * (1 + max_abs(h)) * (1 + v.phi1.norm()));
    CHECK(max_abs(h.adjoint() * v.phi2 - e2 * v.phi2) < 1e-10 * (1 + max_abs(h)) * (1 + v.phi2.norm()));
    CHECK(std::abs(v.phi1.dot(v.psi1) - 1.0) < 1e-12);
    CHECK(std::abs(v.phi2.dot(v.psi2) - 1.0) < 1e-12);
    CHECK(std::abs(v.phi1.dot(v.psi2)) < 1e-12);
    CHECK(std::abs(v.phi2.dot(v.psi1)) < 1e-12);
  }
}

TEST_CASE("metric_closed_form examples") {
  TwoLevelParams p;
  p.energy = 1.0;
  p.phi = 0.7;
  CHECK(max_abs(metric_closed_form(p, 1.0, 1.0) - ComplexMatrix::Identity(2, 2)) < 1e-15);
  p.phi = 0.0;
  p.theta = Complex(0.0, 1.0);
  const Complex i{0.0, 1.0};
  const ComplexMatrix expected = m2(std::cosh(1.0), i * std::sinh(1.0), -i * std::sinh(1.0), std::cosh(1.0));
  CHECK(max_abs(metric_closed_form(p, 1.0, 1.0) - expected) < 1e-14);
  const MetricTerms t = metric_terms(p, 1.0, 1.0);
  CHECK(t.a == doctest::Approx(std::pow(std::cosh(0.5), 2)));
  CHECK(t.b == doctest::Approx(std::pow(std::sinh(0.5), 2)));
  CHECK(std::abs(t.lambda - Complex(0.0, -std::sinh(1.0))) < 1e-14);
  CHECK(kind_of([&] { metric_closed_form(p, 0.0, 1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("closed-form metric equals the spectral sum") {
  for (int trial = 0; trial < 1000; ++trial) {
    TwoLevelParams p = random_params();
    const double k = std::exp(uniform(std::log(0.1), std::log(10.0)));
    const double u = std::exp(uniform(std::log(0.1), std::log(10.0)));
    p.n2 = std::polar(std::sqrt(k), uniform(0.0, 2 * pi));
    p.n1 = std::polar(std::sqrt(k * u), uniform(0.0, 2 * pi));
    const ComplexMatrix closed = metric_closed_form(p, k, u);
    const ComplexMatrix spectral = metric_from_spectral(spectral_of(p));
    CHECK(max_abs(closed - spectral) < 1e-10 * std::max(1.0, max_abs(spectral)));
    CHECK(pseudo_hermiticity_residual(compose(p), closed) < 1e-10 * std::max(1.0, max_abs(closed) * max_abs(compose(p))));
  }
}

TEST_CASE("normalization_from_metric recovers the weights") {
  const Tolerances tol;
  for (int trial = 0; trial < 200; ++trial) {
    const TwoLevelParams p = random_params();
    const ComplexMatrix eta = metric_from_spectral(spectral_of(p));
    TwoLevelParams unit = p;
    unit.n1 = std::polar(1.0, std::arg(p.n1));
    unit.n2 = std::polar(1.0, std::arg(p.n2));
    const TwoLevelParams back = normalization_from_metric(unit, eta, tol);
    CHECK(std::abs(back.n1 - p.n1) < 1e-8 * std::abs(p.n1));
    CHECK(std::abs(back.n2 - p.n2) < 1e-8 * std::abs(p.n2));
  }
  TwoLevelParams p;
  p.energy = 1.0;
  p.theta = pi / 3;
  CHECK(kind_of([&] { normalization_from_metric(p, m2(1, 0.3, 0.3, 1), tol); }) == ErrorKind::NotPseudoHermitian);
}

TEST_CASE("qs_residual examples") {
  TwoLevelParams p;
  p.energy = 1.0;
  p.theta = pi / 2;
  const auto still = qs_residual(p, Rates{});
  for (double r : still) CHECK(r == 0.0);

  const auto rotating = qs_residual(p, Rates{0.0, 1.0, 0.0, 0.0});
  for (double r : rotating) CHECK(std::abs(r) < 1e-15);

  const auto growing = qs_residual(p, Rates{0.0, Complex(0.0, 1.0), 0.0, 0.0});
  CHECK(growing[0] == doctest::Approx(0.5));
  CHECK(growing[1] == doctest::Approx(0.5));
  CHECK(growing[3] == doctest::Approx(1.0));
}

TEST_CASE("qs_residuals on sampled paths") {
  const std::vector<double> t = linspace(0.0, 1.0, 50);
  std::vector<TwoLevelParams> constant(t.size(), random_params());
  CHECK(qs_residuals(t, constant).max_abs < 1e-12);

  std::vector<TwoLevelParams> spin, grow;
  for (double x : t) {
    TwoLevelParams p;
    p.energy = 1.0;
    p.theta = pi / 2;
    p.phi = x;
    spin.push_back(p);
    p.phi = Complex(0.0, x);
    grow.push_back(p);
  }
  CHECK(qs_residuals(t, spin).max_abs < 1e-12);
  const ResidualSeries g = qs_residuals(t, grow);
  CHECK(g.values[10][0] == doctest::Approx(0.5));
  CHECK(g.max_abs == doctest::Approx(1.0));

  const std::vector<double> two = {0.0, 1.0};
  CHECK(kind_of([&] { qs_residuals(two, std::span(grow).first(2)); }) == ErrorKind::GridTooCoarse);
}

TEST_CASE("residuals vanish on paths with a constant metric") {
  const Tolerances tol;
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix eta = random_positive(2);
    const HamiltonianModel model =
        similar_to_hermitian(eta, random_hermitian(2), random_hermitian(2), random_hermitian(2), uniform(0.5, 1.5));
    const std::vector<double> t = linspace(0.0, 1.0, 1600);
    std::vector<ComplexMatrix> samples;
    for (double x : t) samples.push_back(model.eval(x));
    std::vector<TwoLevelParams> path;
    try {
      path = track_parameters(samples, tol);
    } catch (const Error&) {
      continue;  // the random path touched the chart boundary
    }
    double gap = 1e300;
    for (auto& p : path) {
      p = normalization_from_metric(p, eta, tol);
      gap = std::min(gap, p.energy);
    }
    if (gap < 0.25) continue;  // too close to an exceptional point for this grid
    CHECK(qs_residuals(t, path).max_abs < 1e-6);
  }
}

TEST_CASE("branch tracking keeps phi continuous through a full turn") {
  const Tolerances tol;
  std::vector<ComplexMatrix> samples;
  for (double x : kLoop) samples.push_back(rotating_model().eval(x));
  const auto path = track_parameters(samples, tol);
  for (std::size_t i = 1; i < path.size(); ++i) CHECK(std::abs(path[i].phi - path[i - 1].phi) < 0.1);
  CHECK(std::abs(path.back().phi - (path.front().phi - 2.0 * pi)) < 1e-10);

  TwoLevelParams far = path.front();
  far.phi += 2.5;
  CHECK(kind_of([&] { decompose_near(samples.front(), far, tol); }) == ErrorKind::BranchTrackingFailure);
}

TEST_CASE("classify: Hermitian rotating family is case 1 with u = 1") {
  const Classification c = classify(rotating_model(), kLoop, Tolerances{});
  CHECK(c.verdict == Verdict::QuasiStationaryCase1);
  CHECK(c.u_fixed);
  CHECK(c.u == 1.0);
  REQUIRE(c.metric);
  CHECK(max_abs(*c.metric - ComplexMatrix::Identity(2, 2)) < 1e-12);
  CHECK(c.diagnostics.cross_check_agrees);
  CHECK(c.diagnostics.solver_dim == 1);
}

TEST_CASE("classify: trivial family leaves u free") {
  const Classification c = classify(trivial_model(), linspace(0.0, 2.0, 100), Tolerances{});
  CHECK(c.verdict == Verdict::TrivialFamily);
  CHECK_FALSE(c.u_fixed);
  CHECK_FALSE(c.metric);
  CHECK(c.diagnostics.solver_dim == 2);
  CHECK(c.diagnostics.cross_check_agrees);
  REQUIRE(c.diagnostics.fitted_f.size() == 101);
  CHECK(c.diagnostics.fitted_f.back() == doctest::Approx(5.0));
}

TEST_CASE("classify: exponential off-diagonal model is not quasi-stationary") {
  const Classification c = classify(exponential_model(), linspace(0.0, 1.0, 100), Tolerances{});
  CHECK(c.verdict == Verdict::NotQuasiStationary);
  CHECK_FALSE(c.metric);
  CHECK(c.diagnostics.case1_residual > 0.1);
  CHECK(c.diagnostics.failing_condition.find("case 1") != std::string::npos);
  CHECK(c.diagnostics.solver_dim == 1);
  CHECK(c.diagnostics.cross_check_agrees);
}

TEST_CASE("classify: non-Hermitian case 1 with constant Im phi") {
  const Tolerances tol;
  for (double y : {-0.6, 0.0, 0.4}) {
    const HamiltonianModel m = case1_model(0.3, 1.2, pi / 3, y, 1.0);
    const Classification c = classify(m, kLoop, tol);
    CHECK(c.verdict == Verdict::QuasiStationaryCase1);
    REQUIRE(c.metric);
    CHECK(c.diagnostics.cross_check_agrees);
    CHECK(c.diagnostics.solver_dim == 1);
    for (double t : {0.1, 1.7, 4.4}) CHECK(pseudo_hermiticity_residual(m.eval(t), *c.metric) < 1e-12);
  }
}

TEST_CASE("classify: case 1 starting on the chart edge") {
  // [[cos t, 2 sin t], [sin t / 2, -cos t]] has b(0) = 0; the ratio comes from later samples.
  const HamiltonianModel m(2,
                           {{TermExpr::cos(1.0, 1.0)},
                            {TermExpr::sin(2.0, 1.0)},
                            {TermExpr::sin(0.5, 1.0)},
                            {TermExpr::cos(-1.0, 1.0)}});
  const Classification c = classify(m, linspace(0.0, 1.5, 150), Tolerances{});
  CHECK(c.verdict == Verdict::QuasiStationaryCase1);
  REQUIRE(c.metric);
  CHECK(max_abs(*c.metric - m2(1, 0, 0, 4)) < 1e-10);
  CHECK(c.diagnostics.cross_check_agrees);
}

TEST_CASE("classify: models similar to Hermitian families are case 2") {
  const Tolerances tol;
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const ComplexMatrix eta = random_positive(2);
    const HamiltonianModel m =
        similar_to_hermitian(eta, random_hermitian(2), random_hermitian(2), random_hermitian(2), uniform(0.5, 1.5));
    Classification c;
    try {
      c = classify(m, linspace(0.0, 1.0, 120), tol);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BranchTrackingFailure);
      continue;
    }
    ++checked;
    CHECK(c.verdict == Verdict::QuasiStationaryCase2);
    CHECK(c.u_fixed);
    CHECK(c.u > 0.0);
    REQUIRE(c.metric);
    CHECK(metric_distance(*c.metric, eta) < 1e-8);
    CHECK(c.diagnostics.cross_check_agrees);
  }
  CHECK(checked >= 20);
}

TEST_CASE("classify follows the literal case 1 condition on off-diagonal models") {
  // [[0, b], [c, 0]] with bc > 0 but |b|^2 / (bc) varying: the case 1 test
  // fails rather than accepting every off-diagonal b, c.
  const Tolerances tol;
  const Classification varying = classify(exponential_model(), linspace(0.0, 1.0, 50), tol);
  CHECK(varying.verdict != Verdict::QuasiStationaryCase1);
  CHECK(varying.diagnostics.case1_residual > 0.0);

  // Same structure with |b|^2 / (bc) constant: accepted as case 1.
  const Complex i{0.0, 1.0};
  const HamiltonianModel steady(2, {{}, {TermExpr::expo(2.0, i)}, {TermExpr::expo(0.5, -i)}, {}});
  const Classification c = classify(steady, linspace(0.0, 3.0, 50), tol);
  CHECK(c.verdict == Verdict::QuasiStationaryCase1);
  REQUIRE(c.metric);
  CHECK(max_abs(*c.metric - m2(1, 0, 0, 4)) < 1e-10);
}

TEST_CASE("classify rejects complex spectra, scalars and bad input") {
  const Tolerances tol;
  const HamiltonianModel rot(2, {{}, {TermExpr::poly(1.0, 0)}, {TermExpr::poly(-1.0, 0)}, {}});
  const Classification c = classify(rot, linspace(0.0, 1.0, 10), tol);
  CHECK(c.verdict == Verdict::NotRealDiagonalizable);
  CHECK_FALSE(c.diagnostics.failing_condition.empty());

  const HamiltonianModel scalar = HamiltonianModel::constant(ComplexMatrix::Identity(2, 2));
  CHECK(kind_of([&] { classify(scalar, linspace(0.0, 1.0, 10), tol); }) == ErrorKind::ScalarMatrix);
  CHECK(kind_of([&] { classify(rotating_model(), linspace(0.0, 1.0, 1), tol); }) == ErrorKind::GridTooCoarse);
  const HamiltonianModel three = HamiltonianModel::constant(ComplexMatrix::Identity(3, 3));
  CHECK(kind_of([&] { classify(three, linspace(0.0, 1.0, 10), tol); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("classification JSON mirrors the structure") {
  const Classification c = classify(rotating_model(), kLoop, Tolerances{});
  const auto doc = nlohmann::json::parse(to_json(c));
  CHECK(doc["verdict"] == "QuasiStationaryCase1");
  CHECK(doc["u_constraint"]["kind"] == "fixed");
  CHECK(doc["u_constraint"]["u"] == 1.0);
  CHECK(doc["metric"][0][0]["re"].get<double>() == doctest::Approx(1.0));
  CHECK(doc["diagnostics"]["cross_check_agrees"] == true);

  const Classification t = classify(trivial_model(), linspace(0.0, 1.0, 20), Tolerances{});
  const auto tdoc = nlohmann::json::parse(to_json(t));
  CHECK(tdoc["u_constraint"]["kind"] == "free");
  CHECK(tdoc["metric"].is_null());
}
