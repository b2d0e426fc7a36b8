#include "quasistat/quasistat.h"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "quasistat/evolution.hpp"
#include "quasistat/geometry.hpp"
#include "quasistat/model.hpp"
#include "quasistat/spectral.hpp"
#include "quasistat/two_level.hpp"

using namespace quasistat;

struct qs_model {
  HamiltonianModel model;
};

struct qs_metric_solution {
  MetricSolution solution;
  Eigen::Index dim = 0;
};

struct qs_classification {
  two_level::Classification value;
  std::string json;
};

struct qs_propagation {
  HamiltonianModel model;
  Tolerances tol;
  PropagatorResult result;
};

namespace {

thread_local std::string last_error;

qs_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotHermitian: return QS_ERR_NOT_HERMITIAN;
    case ErrorKind::NotPositiveDefinite: return QS_ERR_NOT_POSITIVE_DEFINITE;
    case ErrorKind::SchemaError: return QS_ERR_SCHEMA;
    case ErrorKind::DimensionMismatch: return QS_ERR_DIMENSION_MISMATCH;
    case ErrorKind::Degenerate: return QS_ERR_DEGENERATE;
    case ErrorKind::NotDiagonalizable: return QS_ERR_NOT_DIAGONALIZABLE;
    case ErrorKind::ComplexSpectrum: return QS_ERR_COMPLEX_SPECTRUM;
    case ErrorKind::SingularMetric: return QS_ERR_SINGULAR_METRIC;
    case ErrorKind::NotPseudoHermitian: return QS_ERR_NOT_PSEUDO_HERMITIAN;
    case ErrorKind::NoSolution: return QS_ERR_NO_SOLUTION;
    case ErrorKind::NoPositiveMember: return QS_ERR_NO_POSITIVE_MEMBER;
    case ErrorKind::ScalarMatrix: return QS_ERR_SCALAR_MATRIX;
    case ErrorKind::OutsideChart: return QS_ERR_OUTSIDE_CHART;
    case ErrorKind::GridTooCoarse: return QS_ERR_GRID_TOO_COARSE;
    case ErrorKind::BranchTrackingFailure: return QS_ERR_BRANCH_TRACKING;
    case ErrorKind::StepUnderflow: return QS_ERR_STEP_UNDERFLOW;
    case ErrorKind::NotClosed: return QS_ERR_NOT_CLOSED;
    case ErrorKind::InvalidArgument: return QS_ERR_INVALID_ARGUMENT;
    case ErrorKind::Io: return QS_ERR_IO;
  }
  return QS_ERR_INTERNAL;
}

qs_status fail(qs_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename Fn>
qs_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    return fn();
  } catch (const Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail(QS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QS_ERR_INTERNAL, "unknown exception");
  }
}

#define QS_REQUIRE(ptr)                                                   \
  do {                                                                    \
    if ((ptr) == nullptr) return fail(QS_ERR_NULL_ARGUMENT, #ptr " is null"); \
  } while (0)

Tolerances to_tol(const qs_tolerances* t) {
  if (t == nullptr) return {};
  Tolerances out{t->structural_tol, t->ode_tol, t->pd_margin, t->hbar};
  out.validate();
  return out;
}

ComplexMatrix read_matrix(const double* re_im, Eigen::Index n) {
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index k = 2 * (i * n + j);
      m(i, j) = Complex(re_im[k], re_im[k + 1]);
    }
  }
  return m;
}

void write_matrix(const ComplexMatrix& m, double* re_im) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const Eigen::Index k = 2 * (i * m.cols() + j);
      re_im[k] = m(i, j).real();
      re_im[k + 1] = m(i, j).imag();
    }
  }
}

ComplexVector read_vector(const double* re_im, Eigen::Index n) {
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(re_im[2 * i], re_im[2 * i + 1]);
  return v;
}

Eigen::Index dim_of(const qs_model* m) { return static_cast<Eigen::Index>(m->model.dim()); }

template <typename Fn>
qs_status with_output(std::FILE* fallback, const char* path, Fn&& write) {
  if (path == nullptr) {
    write(std::cout);
    std::cout.flush();
    (void)fallback;
    return QS_OK;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) return fail(QS_ERR_IO, std::string("cannot open '") + path + "' for writing");
  write(out);
  if (!out) return fail(QS_ERR_IO, std::string("write to '") + path + "' failed");
  return QS_OK;
}

}  // namespace

extern "C" {

const char* qs_last_error(void) { return last_error.c_str(); }

const char* qs_status_name(qs_status status) {
  switch (status) {
    case QS_OK: return "OK";
    case QS_ERR_NOT_HERMITIAN: return "NotHermitian";
    case QS_ERR_NOT_POSITIVE_DEFINITE: return "NotPositiveDefinite";
    case QS_ERR_SCHEMA: return "SchemaError";
    case QS_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case QS_ERR_DEGENERATE: return "Degenerate";
    case QS_ERR_NOT_DIAGONALIZABLE: return "NotDiagonalizable";
    case QS_ERR_COMPLEX_SPECTRUM: return "ComplexSpectrum";
    case QS_ERR_SINGULAR_METRIC: return "SingularMetric";
    case QS_ERR_NOT_PSEUDO_HERMITIAN: return "NotPseudoHermitian";
    case QS_ERR_NO_SOLUTION: return "NoSolution";
    case QS_ERR_NO_POSITIVE_MEMBER: return "NoPositiveMember";
    case QS_ERR_SCALAR_MATRIX: return "ScalarMatrix";
    case QS_ERR_OUTSIDE_CHART: return "OutsideChart";
    case QS_ERR_GRID_TOO_COARSE: return "GridTooCoarse";
    case QS_ERR_BRANCH_TRACKING: return "BranchTrackingFailure";
    case QS_ERR_STEP_UNDERFLOW: return "StepUnderflow";
    case QS_ERR_NOT_CLOSED: return "NotClosed";
    case QS_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case QS_ERR_IO: return "IoError";
    case QS_ERR_NULL_ARGUMENT: return "NullArgument";
    case QS_ERR_INTERNAL: return "InternalError";
  }
  return "Unknown";
}

qs_tolerances qs_default_tolerances(void) {
  const Tolerances t;
  return {t.structural_tol, t.ode_tol, t.pd_margin, t.hbar};
}

qs_status qs_model_load(const char* path, qs_model** out) {
  QS_REQUIRE(path);
  QS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    *out = new qs_model{load_model(path)};
    return QS_OK;
  });
}

qs_status qs_model_parse(const char* text, size_t length, qs_model** out) {
  QS_REQUIRE(text);
  QS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    *out = new qs_model{parse_model(std::string_view(text, length))};
    return QS_OK;
  });
}

void qs_model_free(qs_model* model) { delete model; }

size_t qs_model_dim(const qs_model* model) { return model ? model->model.dim() : 0; }

const char* qs_model_label(const qs_model* model) { return model ? model->model.label().c_str() : ""; }

qs_status qs_model_eval(const qs_model* model, double t, double* re_im) {
  QS_REQUIRE(model);
  QS_REQUIRE(re_im);
  return guarded([&] {
    write_matrix(model->model.eval(t), re_im);
    return QS_OK;
  });
}

qs_status qs_model_eval_dot(const qs_model* model, double t, double* re_im) {
  QS_REQUIRE(model);
  QS_REQUIRE(re_im);
  return guarded([&] {
    write_matrix(model->model.eval_dot(t), re_im);
    return QS_OK;
  });
}

qs_status qs_real_discrete_check(const qs_model* model, double t, const qs_tolerances* tol, int* diagonalizable,
                                 int* spectrum_real, double* eigenvalues_re_im) {
  QS_REQUIRE(model);
  QS_REQUIRE(diagonalizable);
  QS_REQUIRE(spectrum_real);
  return guarded([&] {
    const RealDiscreteReport r = real_discrete_check(model->model.eval(t), to_tol(tol));
    *diagonalizable = r.diagonalizable ? 1 : 0;
    *spectrum_real = r.spectrum_real ? 1 : 0;
    if (eigenvalues_re_im != nullptr) {
      for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
        eigenvalues_re_im[2 * i] = r.eigenvalues[i].real();
        eigenvalues_re_im[2 * i + 1] = r.eigenvalues[i].imag();
      }
    }
    return QS_OK;
  });
}

qs_status qs_spectral_metric(const qs_model* model, double t, const qs_tolerances* tol, double* re_im) {
  QS_REQUIRE(model);
  QS_REQUIRE(re_im);
  return guarded([&] {
    write_matrix(metric_from_spectral(biorthonormalize(model->model.eval(t), to_tol(tol))), re_im);
    return QS_OK;
  });
}

qs_status qs_pseudo_hermiticity_residual(const qs_model* model, double t, const double* eta_re_im,
                                         double* residual) {
  QS_REQUIRE(model);
  QS_REQUIRE(eta_re_im);
  QS_REQUIRE(residual);
  return guarded([&] {
    *residual = pseudo_hermiticity_residual(model->model.eval(t), read_matrix(eta_re_im, dim_of(model)));
    return QS_OK;
  });
}

qs_status qs_solve_constant_metric(const qs_model* model, const double* times, size_t count,
                                   const qs_tolerances* tol, qs_metric_solution** out) {
  QS_REQUIRE(model);
  QS_REQUIRE(times);
  QS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    if (count < 2) return fail(QS_ERR_INVALID_ARGUMENT, "at least two sample times are required");
    const std::span<const double> samples(times, count);
    auto* handle = new qs_metric_solution{constant_metric_space(model->model, samples, to_tol(tol)), dim_of(model)};
    *out = handle;
    if (handle->solution.solution_dim == 0) {
      return fail(QS_ERR_NO_SOLUTION, "NoSolution: no constant Hermitian metric intertwines the sampled Hamiltonians");
    }
    if (!handle->solution.pd_witness) {
      return fail(QS_ERR_NO_POSITIVE_MEMBER,
                  "NoPositiveMember: constant pseudo-metrics exist but none is positive-definite");
    }
    return QS_OK;
  });
}

size_t qs_metric_solution_dim(const qs_metric_solution* s) { return s ? s->solution.solution_dim : 0; }

int qs_metric_solution_has_witness(const qs_metric_solution* s) {
  return s && s->solution.pd_witness ? 1 : 0;
}

qs_status qs_metric_solution_witness(const qs_metric_solution* s, double* re_im) {
  QS_REQUIRE(s);
  QS_REQUIRE(re_im);
  if (!s->solution.pd_witness) return fail(QS_ERR_NO_POSITIVE_MEMBER, "no positive-definite witness");
  write_matrix(*s->solution.pd_witness, re_im);
  return QS_OK;
}

qs_status qs_metric_solution_basis(const qs_metric_solution* s, size_t index, double* re_im) {
  QS_REQUIRE(s);
  QS_REQUIRE(re_im);
  if (index >= s->solution.basis.size()) return fail(QS_ERR_INVALID_ARGUMENT, "basis index out of range");
  write_matrix(s->solution.basis[index], re_im);
  return QS_OK;
}

void qs_metric_solution_free(qs_metric_solution* s) { delete s; }

qs_status qs_classify(const qs_model* model, const double* grid, size_t count, const qs_tolerances* tol,
                      qs_classification** out) {
  QS_REQUIRE(model);
  QS_REQUIRE(grid);
  QS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto value = two_level::classify(model->model, std::span<const double>(grid, count), to_tol(tol));
    std::string json = two_level::to_json(value);
    *out = new qs_classification{std::move(value), std::move(json)};
    return QS_OK;
  });
}

qs_verdict qs_classification_verdict(const qs_classification* c) {
  if (c == nullptr) return QS_VERDICT_NOT_QUASI_STATIONARY;
  switch (c->value.verdict) {
    case two_level::Verdict::QuasiStationaryCase1: return QS_VERDICT_CASE1;
    case two_level::Verdict::QuasiStationaryCase2: return QS_VERDICT_CASE2;
    case two_level::Verdict::TrivialFamily: return QS_VERDICT_TRIVIAL_FAMILY;
    case two_level::Verdict::NotQuasiStationary: return QS_VERDICT_NOT_QUASI_STATIONARY;
    case two_level::Verdict::NotRealDiagonalizable: return QS_VERDICT_NOT_REAL_DIAGONALIZABLE;
  }
  return QS_VERDICT_NOT_QUASI_STATIONARY;
}

const char* qs_verdict_name(qs_verdict verdict) {
  switch (verdict) {
    case QS_VERDICT_CASE1: return two_level::to_string(two_level::Verdict::QuasiStationaryCase1);
    case QS_VERDICT_CASE2: return two_level::to_string(two_level::Verdict::QuasiStationaryCase2);
    case QS_VERDICT_TRIVIAL_FAMILY: return two_level::to_string(two_level::Verdict::TrivialFamily);
    case QS_VERDICT_NOT_QUASI_STATIONARY: return two_level::to_string(two_level::Verdict::NotQuasiStationary);
    case QS_VERDICT_NOT_REAL_DIAGONALIZABLE: return two_level::to_string(two_level::Verdict::NotRealDiagonalizable);
  }
  return "Unknown";
}

int qs_classification_u_fixed(const qs_classification* c) { return c && c->value.u_fixed ? 1 : 0; }

double qs_classification_u(const qs_classification* c) { return c ? c->value.u : 0.0; }

int qs_classification_has_metric(const qs_classification* c) { return c && c->value.metric ? 1 : 0; }

qs_status qs_classification_metric(const qs_classification* c, double* re_im) {
  QS_REQUIRE(c);
  QS_REQUIRE(re_im);
  if (!c->value.metric) return fail(QS_ERR_INVALID_ARGUMENT, "classification carries no metric");
  write_matrix(*c->value.metric, re_im);
  return QS_OK;
}

int qs_classification_cross_check_agrees(const qs_classification* c) {
  return c && c->value.diagnostics.cross_check_agrees ? 1 : 0;
}

const char* qs_classification_failing_condition(const qs_classification* c) {
  return c ? c->value.diagnostics.failing_condition.c_str() : "";
}

const char* qs_classification_json(const qs_classification* c) { return c ? c->json.c_str() : ""; }

void qs_classification_free(qs_classification* c) { delete c; }

qs_status qs_propagate(const qs_model* model, double t0, double t1, size_t steps, const qs_tolerances* tol,
                       qs_propagation** out) {
  QS_REQUIRE(model);
  QS_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const Tolerances t = to_tol(tol);
    const std::vector<double> grid = uniform_grid(t0, t1, steps);
    *out = new qs_propagation{model->model, t, propagate(model->model, grid, t)};
    return QS_OK;
  });
}

size_t qs_propagation_length(const qs_propagation* p) { return p ? p->result.times.size() : 0; }

qs_status qs_propagation_times(const qs_propagation* p, double* times) {
  QS_REQUIRE(p);
  QS_REQUIRE(times);
  std::copy(p->result.times.begin(), p->result.times.end(), times);
  return QS_OK;
}

qs_status qs_propagation_unitary(const qs_propagation* p, size_t index, double* re_im) {
  QS_REQUIRE(p);
  QS_REQUIRE(re_im);
  if (index >= p->result.u.size()) return fail(QS_ERR_INVALID_ARGUMENT, "time index out of range");
  write_matrix(p->result.u[index], re_im);
  return QS_OK;
}

qs_status qs_propagation_defect(const qs_propagation* p, const double* eta_re_im, double* series,
                                double* max_defect) {
  QS_REQUIRE(p);
  QS_REQUIRE(eta_re_im);
  return guarded([&] {
    const auto n = static_cast<Eigen::Index>(p->model.dim());
    const DefectSeries d = unitarity_defect(p->result, read_matrix(eta_re_im, n));
    if (series != nullptr) std::copy(d.values.begin(), d.values.end(), series);
    if (max_defect != nullptr) *max_defect = d.max;
    return QS_OK;
  });
}

qs_status qs_propagation_norm_history(const qs_propagation* p, const double* psi0_re_im, const double* phi0_re_im,
                                      const double* metric_re_im, int flowed, double* out_re_im) {
  QS_REQUIRE(p);
  QS_REQUIRE(psi0_re_im);
  QS_REQUIRE(phi0_re_im);
  QS_REQUIRE(metric_re_im);
  QS_REQUIRE(out_re_im);
  return guarded([&] {
    const auto n = static_cast<Eigen::Index>(p->model.dim());
    const ComplexVector psi0 = read_vector(psi0_re_im, n);
    const ComplexVector phi0 = read_vector(phi0_re_im, n);
    const ComplexMatrix metric = read_matrix(metric_re_im, n);
    std::vector<Complex> s;
    if (flowed != 0) {
      const XiFlow flow = xi_flow(p->model, p->result, metric, p->tol);
      s = norm_history(p->result, psi0, phi0, std::span<const ComplexMatrix>(flow.xi));
    } else {
      s = norm_history(p->result, psi0, phi0, metric);
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      out_re_im[2 * i] = s[i].real();
      out_re_im[2 * i + 1] = s[i].imag();
    }
    return QS_OK;
  });
}

qs_status qs_propagation_xi_residual(const qs_propagation* p, const double* xi0_re_im, double* max_residual) {
  QS_REQUIRE(p);
  QS_REQUIRE(xi0_re_im);
  QS_REQUIRE(max_residual);
  return guarded([&] {
    const auto n = static_cast<Eigen::Index>(p->model.dim());
    *max_residual = xi_flow(p->model, p->result, read_matrix(xi0_re_im, n), p->tol).max_residual;
    return QS_OK;
  });
}

void qs_propagation_free(qs_propagation* p) { delete p; }

qs_status qs_geometric_phase(const qs_model* model, double t0, double t1, size_t steps, size_t level,
                             qs_gauge gauge, const double* metric_re_im, const qs_tolerances* tol, double* re,
                             double* im) {
  QS_REQUIRE(model);
  QS_REQUIRE(re);
  QS_REQUIRE(im);
  return guarded([&] {
    const Tolerances t = to_tol(tol);
    const std::vector<double> grid = uniform_grid(t0, t1, steps);
    std::optional<ComplexMatrix> metric;
    if (metric_re_im != nullptr) metric = read_matrix(metric_re_im, dim_of(model));
    const geometry::ParameterPath path = geometry::path_from_model(model->model, grid, t, metric);
    const Complex g = geometry::geometric_phase(
        path, level, gauge == QS_GAUGE_RAW ? geometry::Gauge::Raw : geometry::Gauge::ImagCancelling);
    *re = g.real();
    *im = g.imag();
    return QS_OK;
  });
}

qs_status qs_write_complex_csv(const char* path, const double* times, const double* re_im, size_t count) {
  QS_REQUIRE(times);
  QS_REQUIRE(re_im);
  return guarded([&] {
    std::vector<Complex> values(count);
    for (size_t i = 0; i < count; ++i) values[i] = Complex(re_im[2 * i], re_im[2 * i + 1]);
    return with_output(stdout, path, [&](std::ostream& os) {
      write_complex_series_csv(os, std::span<const double>(times, count), values);
    });
  });
}

qs_status qs_write_real_csv(const char* path, const double* times, const double* values, size_t count,
                            const char* column) {
  QS_REQUIRE(times);
  QS_REQUIRE(values);
  return guarded([&] {
    return with_output(stdout, path, [&](std::ostream& os) {
      write_real_series_csv(os, std::span<const double>(times, count), std::span<const double>(values, count),
                            column ? column : "defect");
    });
  });
}

}  // extern "C"
