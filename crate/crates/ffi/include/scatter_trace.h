#ifndef SCATTER_TRACE_H
#define SCATTER_TRACE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  ST_STATUS_OK = 0,
  ST_STATUS_NULL_POINTER = 1,
  ST_STATUS_INVALID_ARGUMENT = 2,
  ST_STATUS_CONFIG = 3,
  ST_STATUS_NUMERICAL = 4,
  ST_STATUS_VALIDATION = 5,
  ST_STATUS_PANIC = 6,
} StStatus;

/**
 * Potential model.
 */
typedef struct StPotential StPotential;

/**
 * 1D scattering data on an ascending k grid.
 */
typedef struct StScatter1D StScatter1D;

/**
 * 3D phase-shift spectra on an ascending k grid.
 */
typedef struct StSpectra StSpectra;

typedef struct {
  double k;
  double r_re;
  double r_im;
  double t_re;
  double t_im;
  double arg_det_s;
} StScatterPoint;

typedef struct {
  double value;
  double quadrature_error;
} StTrace;

typedef struct {
  double k;
  size_t channels;
  double sigma_bar;
  double hs_norm_squared;
  double re_log_det1;
  double im_log_det1;
  double max_abs_eta;
} StSpectrumSummary;

typedef struct {
  double total;
  double anomaly_term;
  double cross_section_term;
  double det1_term;
  double det1_bound;
  bool bound_violated;
  bool weak_coupling_flag;
  double error_estimate;
} StCasimir3D;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into the library from the same thread.
 */
const char *st_last_error_message(void);

/**
 * Builds a potential from its JSON description, e.g.
 * `{"kind": "gaussian", "height": 1.0, "width": 0.5}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
StStatus st_potential_from_json(const char *json, StPotential **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
StStatus st_potential_delta(double g, StPotential **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
StStatus st_potential_gaussian(double height, double width, StPotential **out);

/**
 * Evaluates `V(x, k)`.
 *
 * # Safety
 * `pot` must come from this library; `out` must be valid.
 */
StStatus st_potential_value(const StPotential *pot, double x, double k, double *out);

/**
 * # Safety
 * `pot` must be null or come from this library, and not be used again.
 */
void st_potential_free(StPotential *pot);

/**
 * Solves the 1D problem on `n` ascending wavenumbers.
 *
 * # Safety
 * `k` must point to `n` doubles; the other pointers must be valid.
 */
StStatus st_scatter1d_solve(const StPotential *pot,
                            const double *k,
                            size_t n,
                            double tol,
                            StScatter1D **out);

/**
 * # Safety
 * `data` must come from this library.
 */
size_t st_scatter1d_len(const StScatter1D *data);

/**
 * # Safety
 * `data` must come from this library; `out` must be valid.
 */
StStatus st_scatter1d_get(const StScatter1D *data, size_t index, StScatterPoint *out);

/**
 * # Safety
 * `data` must be null or come from this library, and not be used again.
 */
void st_scatter1d_free(StScatter1D *data);

/**
 * Spectral trace `∫ (dk/π) φ(k) d arg T / dk` with `φ` given as JSON,
 * e.g. `{"kind": "gaussian_bump", "center": 1.0, "width": 0.5}`.
 *
 * # Safety
 * `data` must come from this library; `phi_json` must be NUL-terminated.
 */
StStatus st_trace1d(const StScatter1D *data, const char *phi_json, StTrace *out);

/**
 * 1D Casimir energy from reflection data (dispersive potentials only).
 *
 * # Safety
 * `data` must come from this library; `out` must be valid.
 */
StStatus st_casimir1d(const StScatter1D *data, StTrace *out);

/**
 * Partial-wave phase shifts on `n` ascending wavenumbers.
 *
 * # Safety
 * `k` must point to `n` doubles; the other pointers must be valid.
 */
StStatus st_phase_shifts(const StPotential *pot,
                         const double *k,
                         size_t n,
                         double tol,
                         StSpectra **out);

/**
 * # Safety
 * `spectra` must come from this library.
 */
size_t st_spectra_len(const StSpectra *spectra);

/**
 * # Safety
 * `spectra` must come from this library; `out` must be valid.
 */
StStatus st_spectra_get(const StSpectra *spectra, size_t index, StSpectrumSummary *out);

/**
 * Copies the channel phase shifts of spectrum `index` into `eta`, which
 * holds `cap` doubles. `len` receives the channel count; if it exceeds
 * `cap` nothing is copied and `InvalidArgument` is returned.
 *
 * # Safety
 * `eta` must point to `cap` writable doubles (or be null with `cap == 0`).
 */
StStatus st_spectra_phase_shifts(const StSpectra *spectra,
                                 size_t index,
                                 double *eta,
                                 size_t cap,
                                 size_t *len);

/**
 * # Safety
 * `spectra` must be null or come from this library, and not be used again.
 */
void st_spectra_free(StSpectra *spectra);

/**
 * 3D Casimir energy from spectra computed for `pot`.
 *
 * # Safety
 * Both handles must come from this library; `out` must be valid.
 */
StStatus st_casimir3d(const StPotential *pot, const StSpectra *spectra, StCasimir3D *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCATTER_TRACE_H */
