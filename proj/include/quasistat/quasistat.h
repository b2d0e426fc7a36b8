/*
 * C interface to the quasistat library.
 *
 * Objects are opaque handles created by qs_* functions and released with the
 * matching *_free. Every fallible call returns a qs_status; on failure a
 * one-line message is available from qs_last_error() (per thread).
 *
 * Matrices cross the boundary as row-major arrays of interleaved doubles:
 * entry (i, j) of an n x n matrix occupies re_im[2*(i*n+j)] and
 * re_im[2*(i*n+j)+1]. Vectors use the same interleaving.
 */
#ifndef QUASISTAT_H
#define QUASISTAT_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(QUASISTAT_BUILDING)
#    define QS_API __declspec(dllexport)
#  else
#    define QS_API __declspec(dllimport)
#  endif
#else
#  define QS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qs_status {
  QS_OK = 0,
  QS_ERR_NOT_HERMITIAN,
  QS_ERR_NOT_POSITIVE_DEFINITE,
  QS_ERR_SCHEMA,
  QS_ERR_DIMENSION_MISMATCH,
  QS_ERR_DEGENERATE,
  QS_ERR_NOT_DIAGONALIZABLE,
  QS_ERR_COMPLEX_SPECTRUM,
  QS_ERR_SINGULAR_METRIC,
  QS_ERR_NOT_PSEUDO_HERMITIAN,
  QS_ERR_NO_SOLUTION,
  QS_ERR_NO_POSITIVE_MEMBER,
  QS_ERR_SCALAR_MATRIX,
  QS_ERR_OUTSIDE_CHART,
  QS_ERR_GRID_TOO_COARSE,
  QS_ERR_BRANCH_TRACKING,
  QS_ERR_STEP_UNDERFLOW,
  QS_ERR_NOT_CLOSED,
  QS_ERR_INVALID_ARGUMENT,
  QS_ERR_IO,
  QS_ERR_NULL_ARGUMENT,
  QS_ERR_INTERNAL
} qs_status;

typedef enum qs_verdict {
  QS_VERDICT_CASE1 = 0,
  QS_VERDICT_CASE2,
  QS_VERDICT_TRIVIAL_FAMILY,
  QS_VERDICT_NOT_QUASI_STATIONARY,
  QS_VERDICT_NOT_REAL_DIAGONALIZABLE
} qs_verdict;

typedef enum qs_gauge { QS_GAUGE_RAW = 0, QS_GAUGE_IMAG_CANCELLING = 1 } qs_gauge;

typedef struct qs_tolerances {
  double structural_tol;
  double ode_tol;
  double pd_margin;
  double hbar;
} qs_tolerances;

typedef struct qs_model qs_model;
typedef struct qs_metric_solution qs_metric_solution;
typedef struct qs_classification qs_classification;
typedef struct qs_propagation qs_propagation;

QS_API const char* qs_last_error(void);
QS_API const char* qs_status_name(qs_status status);
QS_API qs_tolerances qs_default_tolerances(void);

/* Models */
QS_API qs_status qs_model_load(const char* path, qs_model** out);
QS_API qs_status qs_model_parse(const char* text, size_t length, qs_model** out);
QS_API void qs_model_free(qs_model* model);
QS_API size_t qs_model_dim(const qs_model* model);
QS_API const char* qs_model_label(const qs_model* model);
QS_API qs_status qs_model_eval(const qs_model* model, double t, double* re_im);
QS_API qs_status qs_model_eval_dot(const qs_model* model, double t, double* re_im);

/* Spectral checks. eigenvalues_re_im may be NULL; otherwise 2*dim doubles. */
QS_API qs_status qs_real_discrete_check(const qs_model* model, double t, const qs_tolerances* tol,
                                        int* diagonalizable, int* spectrum_real, double* eigenvalues_re_im);
/* eta = sum |phi_n><phi_n| of H(t). */
QS_API qs_status qs_spectral_metric(const qs_model* model, double t, const qs_tolerances* tol, double* re_im);
QS_API qs_status qs_pseudo_hermiticity_residual(const qs_model* model, double t, const double* eta_re_im,
                                                double* residual);

/* Constant metric solver. Returns QS_ERR_NO_SOLUTION or
 * QS_ERR_NO_POSITIVE_MEMBER when applicable, but still fills *out. */
QS_API qs_status qs_solve_constant_metric(const qs_model* model, const double* times, size_t count,
                                          const qs_tolerances* tol, qs_metric_solution** out);
QS_API size_t qs_metric_solution_dim(const qs_metric_solution* solution);
QS_API int qs_metric_solution_has_witness(const qs_metric_solution* solution);
QS_API qs_status qs_metric_solution_witness(const qs_metric_solution* solution, double* re_im);
QS_API qs_status qs_metric_solution_basis(const qs_metric_solution* solution, size_t index, double* re_im);
QS_API void qs_metric_solution_free(qs_metric_solution* solution);

/* Two-level classification. */
QS_API qs_status qs_classify(const qs_model* model, const double* grid, size_t count, const qs_tolerances* tol,
                             qs_classification** out);
QS_API qs_verdict qs_classification_verdict(const qs_classification* c);
QS_API const char* qs_verdict_name(qs_verdict verdict);
QS_API int qs_classification_u_fixed(const qs_classification* c);
QS_API double qs_classification_u(const qs_classification* c);
QS_API int qs_classification_has_metric(const qs_classification* c);
QS_API qs_status qs_classification_metric(const qs_classification* c, double* re_im);
QS_API int qs_classification_cross_check_agrees(const qs_classification* c);
QS_API const char* qs_classification_failing_condition(const qs_classification* c);
QS_API const char* qs_classification_json(const qs_classification* c);
QS_API void qs_classification_free(qs_classification* c);

/* Propagation on a uniform grid of `steps` intervals over [t0, t1]. */
QS_API qs_status qs_propagate(const qs_model* model, double t0, double t1, size_t steps, const qs_tolerances* tol,
                              qs_propagation** out);
QS_API size_t qs_propagation_length(const qs_propagation* p);
QS_API qs_status qs_propagation_times(const qs_propagation* p, double* times);
QS_API qs_status qs_propagation_unitary(const qs_propagation* p, size_t index, double* re_im);
/* series may be NULL; otherwise qs_propagation_length doubles. */
QS_API qs_status qs_propagation_defect(const qs_propagation* p, const double* eta_re_im, double* series,
                                       double* max_defect);
/* <U psi0 | M | U phi0>. With flowed == 0, M = metric_re_im (constant);
 * otherwise metric_re_im is xi0 and M is the flowed xi(t). out holds
 * 2 * qs_propagation_length doubles. */
QS_API qs_status qs_propagation_norm_history(const qs_propagation* p, const double* psi0_re_im,
                                             const double* phi0_re_im, const double* metric_re_im, int flowed,
                                             double* out_re_im);
QS_API qs_status qs_propagation_xi_residual(const qs_propagation* p, const double* xi0_re_im, double* max_residual);
QS_API void qs_propagation_free(qs_propagation* p);

/* Geometric phase of `level` (0 or 1) around the loop traced by a 2x2 model
 * on [t0, t1]. metric_re_im may be NULL (n1 = n2 = 1 at t0). */
QS_API qs_status qs_geometric_phase(const qs_model* model, double t0, double t1, size_t steps, size_t level,
                                    qs_gauge gauge, const double* metric_re_im, const qs_tolerances* tol,
                                    double* re, double* im);

/* CSV output; path NULL writes to stdout. */
QS_API qs_status qs_write_complex_csv(const char* path, const double* times, const double* re_im, size_t count);
QS_API qs_status qs_write_real_csv(const char* path, const double* times, const double* values, size_t count,
                                   const char* column);

#ifdef __cplusplus
}
#endif

#endif /* QUASISTAT_H */
