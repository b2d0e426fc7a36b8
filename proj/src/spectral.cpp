#include "quasistat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace quasistat {

namespace {

double scale_of(const ComplexMatrix& h) { return std::max(1.0, max_norm(h)); }

// Eigenvalue separation below this fraction of the spectral radius counts as degenerate.
constexpr double kGapFraction = 1e-8;
// Eigenvector matrices worse conditioned than this are treated as defective.
constexpr double kMaxEigenvectorCondition = 1e8;

double condition_number(const ComplexMatrix& v) {
  Eigen::JacobiSVD<ComplexMatrix> svd(v);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

void sort_descending_real(std::vector<Complex>& values, std::vector<Eigen::Index>& order) {
  order.resize(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const Complex x = values[static_cast<std::size_t>(a)];
    const Complex y = values[static_cast<std::size_t>(b)];
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  std::vector<Complex> sorted;
  sorted.reserve(values.size());
  for (auto i : order) sorted.push_back(values[static_cast<std::size_t>(i)]);
  values = std::move(sorted);
}

}  // namespace

RealDiscreteReport real_discrete_check(const ComplexMatrix& h, const Tolerances& tol) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "expected a non-empty square matrix");
  }
  RealDiscreteReport report;
  const double scale = scale_of(h);
  const double eps = tol.structural_tol;

  if (h.rows() == 1) {
    report.diagonalizable = true;
    report.spectrum_real = std::abs(h(0, 0).imag()) <= eps * scale;
    report.eigenvalues = {h(0, 0)};
    return report;
  }

  if (h.rows() == 2) {
    const Complex half_trace = 0.5 * (h(0, 0) + h(1, 1));
    const ComplexMatrix traceless = h - half_trace * ComplexMatrix::Identity(2, 2);
    const Complex det = traceless.determinant();
    const bool scalar = max_norm(traceless) <= eps * scale;
    const bool trace_real = std::abs(half_trace.imag()) <= eps * scale;
    const bool det_real = std::abs(det.imag()) <= eps * scale * scale;
    report.diagonalizable = scalar || std::abs(det) > eps * scale * scale;
    report.spectrum_real = trace_real && (scalar || (det_real && det.real() < eps * scale * scale));
    const Complex root = std::sqrt(-det);
    Complex e1 = half_trace + root;
    Complex e2 = half_trace - root;
    if (e2.real() > e1.real()) std::swap(e1, e2);
    report.eigenvalues = {e1, e2};
    return report;
  }

  Eigen::ComplexEigenSolver<ComplexMatrix> es(h);
  if (es.info() != Eigen::Success) return report;
  const double cond = condition_number(es.eigenvectors());
  report.diagonalizable = cond <= kMaxEigenvectorCondition;
  double worst_imag = 0.0;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    report.eigenvalues.push_back(es.eigenvalues()(i));
    worst_imag = std::max(worst_imag, std::abs(es.eigenvalues()(i).imag()));
  }
  report.spectrum_real = worst_imag <= eps * scale * std::max(1.0, cond);
  std::vector<Eigen::Index> order;
  sort_descending_real(report.eigenvalues, order);
  return report;
}

SpectralData biorthonormalize(const ComplexMatrix& h, const Tolerances& tol) {
  const RealDiscreteReport check = real_discrete_check(h, tol);
  if (!check.diagonalizable) throw Error(ErrorKind::NotDiagonalizable, "matrix has a Jordan block");
  if (!check.spectrum_real) throw Error(ErrorKind::ComplexSpectrum, "spectrum is not real");

  Eigen::ComplexEigenSolver<ComplexMatrix> es(h);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NotDiagonalizable, "eigensolver failed");

  const auto n = h.rows();
  std::vector<Complex> values(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::vector<Eigen::Index> order;
  sort_descending_real(values, order);

  double radius = 0.0;
  for (const auto& e : values) radius = std::max(radius, std::abs(e));
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      if (std::abs(values[i] - values[j]) <= kGapFraction * radius) {
        std::ostringstream os;
        os << "eigenvalues " << values[i] << " and " << values[j] << " coincide";
        throw Error(ErrorKind::Degenerate, os.str());
      }
    }
  }

  ComplexMatrix right(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    ComplexVector v = es.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    v /= v.norm();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-8) {
        v *= std::conj(v(i)) / std::abs(v(i));
        v(i) = std::abs(v(i));
        break;
      }
    }
    right.col(k) = v;
  }
  const ComplexMatrix inv = right.fullPivLu().inverse();

  SpectralData data;
  data.reality_flag = true;
  for (Eigen::Index k = 0; k < n; ++k) {
    data.eigenvalues.emplace_back(values[static_cast<std::size_t>(k)].real(), 0.0);
    data.right_vectors.emplace_back(right.col(k));
    data.left_vectors.emplace_back(inv.row(k).adjoint());
  }
  return data;
}

ComplexMatrix metric_from_spectral(const SpectralData& data) {
  if (data.left_vectors.empty()) throw Error(ErrorKind::InvalidArgument, "empty spectral data");
  const auto n = data.left_vectors.front().size();
  ComplexMatrix eta = ComplexMatrix::Zero(n, n);
  for (const auto& phi : data.left_vectors) eta += phi * phi.adjoint();
  return eta;
}

double pseudo_hermiticity_residual(const ComplexMatrix& h, const ComplexMatrix& eta) {
  if (h.rows() != h.cols() || eta.rows() != eta.cols() || h.rows() != eta.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "H and eta must be square of equal size");
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(eta);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0 || s(s.size() - 1) <= 1e-14 * s(0)) {
    throw Error(ErrorKind::SingularMetric, "metric is not invertible");
  }
  return max_norm(h.adjoint() * eta - eta * h);
}

ComplexMatrix hermitian_representation(const ComplexMatrix& h, const ComplexMatrix& eta,
                                       const Tolerances& tol) {
  const double residual = pseudo_hermiticity_residual(h, eta);
  if (residual > tol.structural_tol * std::max(1.0, max_norm(h) * max_norm(eta))) {
    std::ostringstream os;
    os << "intertwining residual " << residual;
    throw Error(ErrorKind::NotPseudoHermitian, os.str());
  }
  return positive_sqrt(eta, tol) * h * positive_inverse_sqrt(eta, tol);
}

namespace {

// Frobenius-orthonormal basis of n x n Hermitian matrices: diagonal units,
// then (E_ij + E_ji)/sqrt2 and i(E_ij - E_ji)/sqrt2 for i < j.
std::vector<ComplexMatrix> hermitian_basis(Eigen::Index n) {
  std::vector<ComplexMatrix> basis;
  for (Eigen::Index i = 0; i < n; ++i) {
    ComplexMatrix b = ComplexMatrix::Zero(n, n);
    b(i, i) = 1.0;
    basis.push_back(std::move(b));
  }
  const double r = 1.0 / std::numbers::sqrt2;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      ComplexMatrix re = ComplexMatrix::Zero(n, n);
      re(i, j) = r;
      re(j, i) = r;
      basis.push_back(std::move(re));
      ComplexMatrix im = ComplexMatrix::Zero(n, n);
      im(i, j) = Complex(0.0, r);
      im(j, i) = Complex(0.0, -r);
      basis.push_back(std::move(im));
    }
  }
  return basis;
}

double min_eigenvalue(const ComplexMatrix& x) {
  const ComplexMatrix sym = 0.5 * (x + x.adjoint());
  return Eigen::SelfAdjointEigenSolver<ComplexMatrix>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

ComplexMatrix combine(const std::vector<ComplexMatrix>& basis, const Eigen::VectorXd& c) {
  ComplexMatrix x = ComplexMatrix::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t k = 0; k < basis.size(); ++k) x += c(static_cast<Eigen::Index>(k)) * basis[k];
  return x;
}

Eigen::VectorXd search_positive_direction(const std::vector<ComplexMatrix>& basis) {
  const auto d = static_cast<Eigen::Index>(basis.size());
  auto score = [&](const Eigen::VectorXd& c) { return min_eigenvalue(combine(basis, c)); };

  if (d == 1) {
    Eigen::VectorXd c(1);
    c << (score(Eigen::VectorXd::Ones(1)) >= score(-Eigen::VectorXd::Ones(1)) ? 1.0 : -1.0);
    return c;
  }

  if (d == 2) {
    // The projective parameter is an angle; scan, then refine by golden section.
    auto at = [&](double a) {
      Eigen::VectorXd c(2);
      c << std::cos(a), std::sin(a);
      return c;
    };
    constexpr int kScan = 720;
    double best_angle = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScan; ++i) {
      const double a = 2.0 * std::numbers::pi * i / kScan;
      const double s = score(at(a));
      if (s > best) {
        best = s;
        best_angle = a;
      }
    }
    const double width = 2.0 * std::numbers::pi / kScan;
    double lo = best_angle - width;
    double hi = best_angle + width;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = score(at(x1));
    double f2 = score(at(x2));
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = score(at(x2));
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = score(at(x1));
      }
    }
    const double refined = 0.5 * (lo + hi);
    return score(at(refined)) >= best ? at(refined) : at(best_angle);
  }

  // Higher dimensions: coordinate search on the unit sphere, starting from the
  // projection of the identity. min-eigenvalue is concave, so the positive
  // region is a convex cone and a local maximum of the normalized score is global.
  Eigen::VectorXd c(d);
  for (Eigen::Index k = 0; k < d; ++k) c(k) = basis[static_cast<std::size_t>(k)].trace().real();
  if (c.norm() == 0.0) c = Eigen::VectorXd::Unit(d, 0);
  c.normalize();
  double best = score(c);
  for (double step = 0.5; step > 1e-10; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (Eigen::Index k = 0; k < d; ++k) {
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd trial = c;
          trial(k) += sign * step;
          if (trial.norm() == 0.0) continue;
          trial.normalize();
          const double s = score(trial);
          if (s > best) {
            best = s;
            c = trial;
            improved = true;
          }
        }
      }
    }
  }
  return c;
}

}  // namespace

MetricSolution constant_metric_space(std::span<const ComplexMatrix> samples, const Tolerances& tol) {
  tol.validate();
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "no samples supplied");
  const Eigen::Index n = samples.front().rows();
  for (const auto& h : samples) {
    if (h.rows() != n || h.cols() != n) throw Error(ErrorKind::DimensionMismatch, "samples differ in size");
  }
  const auto basis = hermitian_basis(n);
  const auto unknowns = static_cast<Eigen::Index>(basis.size());
  const Eigen::Index rows_per_sample = 2 * n * n;

  // Rows are laid out sample by sample in the given order, so the result does
  // not depend on how the blocks were produced.
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(rows_per_sample * static_cast<Eigen::Index>(samples.size()), unknowns);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const double norm = max_norm(samples[s]);
    if (norm == 0.0) continue;
    const ComplexMatrix h = samples[s] / norm;
    const ComplexMatrix h_adj = h.adjoint();
    const Eigen::Index row0 = static_cast<Eigen::Index>(s) * rows_per_sample;
    for (Eigen::Index k = 0; k < unknowns; ++k) {
      const ComplexMatrix& b = basis[static_cast<std::size_t>(k)];
      const ComplexMatrix image = h_adj * b - b * h;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          system(row0 + 2 * (i * n + j), k) = image(i, j).real();
          system(row0 + 2 * (i * n + j) + 1, k) = image(i, j).imag();
        }
      }
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(system, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();  // descending
  const double largest = sv.size() > 0 ? sv(0) : 0.0;

  MetricSolution out;
  // Columns beyond the row count (cannot happen with >= 1 sample) would be free as well.
  for (Eigen::Index k = unknowns - 1; k >= 0; --k) {
    const double value = k < sv.size() ? sv(k) : 0.0;
    out.singular_values.push_back(value);
    if (value <= tol.structural_tol * largest) {
      Eigen::VectorXd coords = svd.matrixV().col(k);
      ComplexMatrix x = combine(basis, coords);
      // Deterministic sign: positive trace, else positive first nonzero diagonal.
      double sign_key = x.trace().real();
      if (std::abs(sign_key) <= 1e-12) {
        for (Eigen::Index i = 0; i < n; ++i) {
          if (std::abs(x(i, i).real()) > 1e-12) {
            sign_key = x(i, i).real();
            break;
          }
        }
      }
      if (sign_key < 0.0) x = -x;
      out.basis.push_back(std::move(x));
    }
  }
  out.solution_dim = out.basis.size();
  out.unique_up_to_scale = out.solution_dim == 1;

  if (out.solution_dim > 0) {
    const Eigen::VectorXd c = search_positive_direction(out.basis);
    ComplexMatrix candidate = combine(out.basis, c);
    candidate = 0.5 * (candidate + candidate.adjoint());
    const double trace = candidate.trace().real();
    if (trace > 0.0) {
      candidate *= static_cast<double>(n) / trace;
      if (min_eigenvalue(candidate) > tol.pd_margin) out.pd_witness = std::move(candidate);
    }
  }
  return out;
}

MetricSolution constant_metric_space(const HamiltonianModel& model, std::span<const double> sample_times,
                                     const Tolerances& tol) {
  std::vector<ComplexMatrix> samples;
  samples.reserve(sample_times.size());
  for (double t : sample_times) samples.push_back(model.eval(t));
  return constant_metric_space(samples, tol);
}

MetricSolution solve_constant_metric(const HamiltonianModel& model, std::span<const double> sample_times,
                                     const Tolerances& tol) {
  if (sample_times.size() < 2) throw Error(ErrorKind::InvalidArgument, "at least two sample times are required");
  MetricSolution solution = constant_metric_space(model, sample_times, tol);
  if (solution.solution_dim == 0) {
    throw Error(ErrorKind::NoSolution, "no constant Hermitian metric intertwines the sampled Hamiltonians");
  }
  if (!solution.pd_witness) {
    throw Error(ErrorKind::NoPositiveMember, "constant pseudo-metrics exist but none is positive-definite");
  }
  return solution;
}

}  // namespace quasistat
