#pragma once

#include <optional>
#include <span>
#include <vector>

#include "quasistat/model.hpp"
#include "quasistat/numerics.hpp"

namespace quasistat {

struct RealDiscreteReport {
  bool diagonalizable = false;
  bool spectrum_real = false;
  std::vector<Complex> eigenvalues;
};

/// Diagonalizability and spectral reality of a single matrix.
///
/// 2x2 matrices are judged from the trace and the determinant of the
/// traceless part; larger ones by eigendecomposition with a condition-number
/// screen on the eigenvector matrix.
RealDiscreteReport real_discrete_check(const ComplexMatrix& h, const Tolerances& tol);

/// Eigenvalues with paired right (H psi = E psi) and left (H^dagger phi = E* phi)
/// eigenvectors satisfying <phi_m|psi_n> = delta_mn.
struct SpectralData {
  std::vector<Complex> eigenvalues;  // descending real part
  std::vector<ComplexVector> right_vectors;
  std::vector<ComplexVector> left_vectors;
  bool reality_flag = false;
};

/// Right vectors have unit norm with their first nonzero component real and
/// positive; left vectors follow from biorthonormality.
SpectralData biorthonormalize(const ComplexMatrix& h, const Tolerances& tol);

/// eta = sum_n |phi_n><phi_n|.
ComplexMatrix metric_from_spectral(const SpectralData& data);

/// Max-entry norm of H^dagger eta - eta H. Throws SingularMetric.
double pseudo_hermiticity_residual(const ComplexMatrix& h, const ComplexMatrix& eta);

/// h = eta^{1/2} H eta^{-1/2}.
ComplexMatrix hermitian_representation(const ComplexMatrix& h, const ComplexMatrix& eta,
                                       const Tolerances& tol);

struct MetricSolution {
  std::vector<ComplexMatrix> basis;  // Hermitian, orthonormal in coordinate space
  std::size_t solution_dim = 0;
  std::optional<ComplexMatrix> pd_witness;  // normalized to trace = dim
  bool unique_up_to_scale = false;
  std::vector<double> singular_values;  // ascending
};

/// Space of constant Hermitian X with H(t_i)^dagger X = X H(t_i) at every
/// sample, plus a positive-definite member when one exists. Never throws on
/// an empty or indefinite space; see solve_constant_metric for that.
MetricSolution constant_metric_space(const HamiltonianModel& model, std::span<const double> sample_times,
                                     const Tolerances& tol);

/// Same as constant_metric_space but throws NoSolution when the space is
/// trivial and NoPositiveMember when no member is positive-definite.
MetricSolution solve_constant_metric(const HamiltonianModel& model, std::span<const double> sample_times,
                                     const Tolerances& tol);

/// Same as constant_metric_space, taking the sampled matrices directly.
MetricSolution constant_metric_space(std::span<const ComplexMatrix> samples, const Tolerances& tol);

}  // namespace quasistat
