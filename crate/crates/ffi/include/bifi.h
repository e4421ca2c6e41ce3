#ifndef BIFI_H
#define BIFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BifiStatus {
  BIFI_STATUS_OK = 0,
  BIFI_STATUS_NULL_POINTER = 1,
  BIFI_STATUS_INVALID_ARGUMENT = 2,
  BIFI_STATUS_DIMENSION_MISMATCH = 3,
  BIFI_STATUS_BUFFER_TOO_SMALL = 4,
  BIFI_STATUS_STABILITY = 5,
  BIFI_STATUS_DIVERGED = 6,
  BIFI_STATUS_DEGENERATE = 7,
  BIFI_STATUS_CONFIG = 8,
  BIFI_STATUS_IO = 9,
  BIFI_STATUS_PANIC = 10,
} BifiStatus;

// Test preset handle.
typedef struct BifiPreset BifiPreset;

// Experiment report handle, with the config echo written next to it.
typedef struct BifiReport BifiReport;

// Bi-fidelity surrogate handle.
typedef struct BifiSurrogate BifiSurrogate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into the library from the same thread.
const char *bifi_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *bifi_version(void);

// Built-in preset 1-5.
//
// # Safety
// `out` must be valid for writes.
enum BifiStatus bifi_preset_new(uint32_t id, struct BifiPreset **out);

// Preset from a TOML run config, using the same keys as the command line tool.
//
// # Safety
// `toml` must be a NUL-terminated UTF-8 string and `out` valid for writes.
enum BifiStatus bifi_preset_from_toml(const char *toml, struct BifiPreset **out);

// Replaces the Knudsen number by a constant.
//
// # Safety
// `preset` must come from this library and not be freed.
enum BifiStatus bifi_preset_set_epsilon(struct BifiPreset *preset, double epsilon);

// Parameter dimension and the high- and low-fidelity cell counts.
//
// # Safety
// `preset` must be live; the out pointers may be null.
enum BifiStatus bifi_preset_shape(const struct BifiPreset *preset,
                                  size_t *dimension,
                                  size_t *hf_cells,
                                  size_t *lf_cells);

// Releases a preset. Null is ignored.
//
// # Safety
// `preset` must come from this library and not be used afterwards.
void bifi_preset_free(struct BifiPreset *preset);

// Kinetic solve at `z`; writes `rbar` on the high-fidelity grid.
//
// # Safety
// `z` holds `z_len` values and `out` has room for `out_len`.
enum BifiStatus bifi_solve_hf(const struct BifiPreset *preset,
                              const double *z,
                              size_t z_len,
                              double *out,
                              size_t out_len);

// Two-velocity solve at `z`; writes `rho` on the low-fidelity grid.
//
// # Safety
// `z` holds `z_len` values and `out` has room for `out_len`.
enum BifiStatus bifi_solve_lf(const struct BifiPreset *preset,
                              const double *z,
                              size_t z_len,
                              double *out,
                              size_t out_len);

// `m`-point Gauss-Legendre rule on (0,1) with weights summing to one.
//
// # Safety
// `nodes` and `weights` each have room for `m` values.
enum BifiStatus bifi_gauss_legendre(size_t m, double *nodes, double *weights);

// Greedy point selection on `count` row-major snapshots of length `len`.
// Writes up to `n_max` indices and pivots and the number selected.
//
// # Safety
// `snapshots` holds `count * len` values; `indices` and `pivots` have room
// for `n_max`; `selected` is valid for writes.
enum BifiStatus bifi_select_points(const double *snapshots,
                                   size_t count,
                                   size_t len,
                                   double ip_weight,
                                   size_t n_max,
                                   double tol,
                                   size_t *indices,
                                   double *pivots,
                                   size_t *selected);

// Surrogate from `n` paired snapshots, row-major, low fidelity of length
// `lf_len` and high fidelity of length `hf_len`.
//
// # Safety
// The snapshot arrays hold `n * lf_len` and `n * hf_len` values; `out` is
// valid for writes.
enum BifiStatus bifi_surrogate_build(const double *lf,
                                     const double *hf,
                                     size_t n,
                                     size_t lf_len,
                                     size_t hf_len,
                                     double lf_weight,
                                     double hf_weight,
                                     struct BifiSurrogate **out);

// High-fidelity approximation from one low-fidelity profile.
//
// # Safety
// `u_lf` holds `lf_len` values and `out` has room for `out_len`.
enum BifiStatus bifi_surrogate_reconstruct(const struct BifiSurrogate *surrogate,
                                           const double *u_lf,
                                           size_t lf_len,
                                           double *out,
                                           size_t out_len);

// Weighted mean of reconstructions over `count` row-major low-fidelity
// profiles. Weights are normalized by their sum.
//
// # Safety
// `u_lf` holds `count * lf_len` values, `weights` holds `count`, and `out`
// has room for `out_len`.
enum BifiStatus bifi_surrogate_mean(const struct BifiSurrogate *surrogate,
                                    const double *u_lf,
                                    size_t count,
                                    size_t lf_len,
                                    const double *weights,
                                    double *out,
                                    size_t out_len);

// Number of snapshots in the surrogate, 0 for null.
//
// # Safety
// `surrogate` is null or live.
size_t bifi_surrogate_len(const struct BifiSurrogate *surrogate);

// Releases a surrogate. Null is ignored.
//
// # Safety
// `surrogate` must come from this library and not be used afterwards.
void bifi_surrogate_free(struct BifiSurrogate *surrogate);

// Full pipeline for a preset on the global worker pool.
//
// # Safety
// `preset` must be live and `out` valid for writes.
enum BifiStatus bifi_run_test(const struct BifiPreset *preset, struct BifiReport **out);

// Errors of the bi-fidelity and low-fidelity statistics and the surrogate
// size actually used. Null out pointers are skipped.
//
// # Safety
// `report` must be live.
enum BifiStatus bifi_report_errors(const struct BifiReport *report,
                                   double *e_mean,
                                   double *e_std,
                                   double *lf_e_mean,
                                   double *lf_e_std,
                                   size_t *n_effective);

// Writes the config echo and the CSV files of a report into `dir`.
//
// # Safety
// `report` must be live and `dir` a NUL-terminated UTF-8 path.
enum BifiStatus bifi_report_write(const struct BifiReport *report, const char *dir);

// Releases a report. Null is ignored.
//
// # Safety
// `report` must come from this library and not be used afterwards.
void bifi_report_free(struct BifiReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIFI_H */
