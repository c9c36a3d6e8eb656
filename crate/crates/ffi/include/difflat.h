/*
 * Every fallible call returns a DifflatStatus. On anything but
 * DIFFLAT_STATUS_OK the message is available from difflat_last_error()
 * on the same thread. Handles are opaque; free each with its *_free.
 */

#ifndef DIFFLAT_H
#define DIFFLAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum DifflatStatus {
  DIFFLAT_STATUS_OK = 0,
  DIFFLAT_STATUS_NULL_POINTER = 1,
  DIFFLAT_STATUS_INVALID_ARGUMENT = 2,
  DIFFLAT_STATUS_SINGULAR_BASIS = 3,
  DIFFLAT_STATUS_DIMENSION_MISMATCH = 4,
  DIFFLAT_STATUS_BALL_TOO_LARGE = 5,
  DIFFLAT_STATUS_NOT_INDICATOR = 6,
  DIFFLAT_STATUS_NOT_DUAL_POINT = 7,
  DIFFLAT_STATUS_OUT_OF_RANGE = 8,
  DIFFLAT_STATUS_PARSE = 9,
  DIFFLAT_STATUS_IO = 10,
  DIFFLAT_STATUS_PANIC = 11,
} DifflatStatus;

/**
 * Autocorrelation variant selector; pass as `uint32_t`.
 */
typedef enum DifflatVariant {
  DIFFLAT_VARIANT_PAIR = 0,
  DIFFLAT_VARIANT_SINGLE = 1,
} DifflatVariant;

typedef struct DifflatAutocorr DifflatAutocorr;

typedef struct DifflatComb DifflatComb;

typedef struct DifflatLattice DifflatLattice;

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next `difflat_*` call on the same thread.
 */
const char *difflat_last_error(void);

/**
 * Builds a lattice from a row-major `dim x dim` matrix whose columns are
 * the basis vectors.
 *
 * # Safety
 * `basis` must point to `dim * dim` doubles; `out` must be writable.
 */
enum DifflatStatus difflat_lattice_new(size_t dim,
                                       const double *basis,
                                       struct DifflatLattice **out_lattice);

/**
 * Reads a lattice file (`dim n` / `basis ...`).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum DifflatStatus difflat_lattice_load(const char *path, struct DifflatLattice **out_lattice);

/**
 * # Safety
 * `lattice` must come from this library and not be freed twice. NULL is ignored.
 */
void difflat_lattice_free(struct DifflatLattice *lattice);

/**
 * Dimension of the lattice; 0 for NULL.
 *
 * # Safety
 * `lattice` must be NULL or a live handle.
 */
size_t difflat_lattice_dim(const struct DifflatLattice *lattice);

/**
 * # Safety
 * `lattice` must be a live handle; `out_value` writable.
 */
enum DifflatStatus difflat_lattice_density(const struct DifflatLattice *lattice, double *out_value);

/**
 * # Safety
 * `lattice` must be a live handle; `out_value` writable.
 */
enum DifflatStatus difflat_lattice_packing_radius(const struct DifflatLattice *lattice,
                                                  double *out_value);

/**
 * Deep-hole estimate of the covering radius on a grid of `grid` points per axis.
 *
 * # Safety
 * `lattice` must be a live handle; `out_value` writable.
 */
enum DifflatStatus difflat_lattice_covering_radius(const struct DifflatLattice *lattice,
                                                   size_t grid,
                                                   double *out_value);

/**
 * Copies the row-major basis matrix into `buf`, which holds `len` doubles
 * (at least `dim * dim`).
 *
 * # Safety
 * `lattice` must be a live handle; `buf` must hold `len` doubles.
 */
enum DifflatStatus difflat_lattice_basis(const struct DifflatLattice *lattice,
                                         double *buf,
                                         size_t len);

/**
 * New handle for the dual lattice.
 *
 * # Safety
 * `lattice` must be a live handle; `out_lattice` writable.
 */
enum DifflatStatus difflat_lattice_dual(const struct DifflatLattice *lattice,
                                        struct DifflatLattice **out_lattice);

/**
 * Tabulates `rule` inside the open ball of radius `radius`.
 *
 * `params` is a comma-separated `key=value` list such as `"p=0.3,seed=42"`;
 * it may be NULL or empty.
 *
 * # Safety
 * `lattice` must be a live handle; strings NUL-terminated; `out_comb` writable.
 */
enum DifflatStatus difflat_comb_generate(const struct DifflatLattice *lattice,
                                         const char *rule,
                                         const char *params,
                                         double radius,
                                         struct DifflatComb **out_comb);

/**
 * # Safety
 * `path` NUL-terminated; `out_comb` writable.
 */
enum DifflatStatus difflat_comb_load(const char *path, struct DifflatComb **out_comb);

/**
 * # Safety
 * `comb` must be a live handle; `path` NUL-terminated.
 */
enum DifflatStatus difflat_comb_save(const struct DifflatComb *comb, const char *path);

/**
 * # Safety
 * `comb` must come from this library and not be freed twice. NULL is ignored.
 */
void difflat_comb_free(struct DifflatComb *comb);

/**
 * Number of nonzero weights; 0 for NULL.
 *
 * # Safety
 * `comb` must be NULL or a live handle.
 */
size_t difflat_comb_len(const struct DifflatComb *comb);

/**
 * Cutoff radius of the tabulation; NaN for NULL.
 *
 * # Safety
 * `comb` must be NULL or a live handle.
 */
double difflat_comb_radius(const struct DifflatComb *comb);

/**
 * Weight at the lattice point with coordinates `coords` (`dim` entries).
 *
 * # Safety
 * `comb` must be a live handle; `coords` must hold `dim` values.
 */
enum DifflatStatus difflat_comb_weight(const struct DifflatComb *comb,
                                       const int64_t *coords,
                                       double *out_re,
                                       double *out_im);

/**
 * Empirical density `sum w / vol(B_r)`.
 *
 * # Safety
 * `comb` must be a live handle; outputs writable.
 */
enum DifflatStatus difflat_comb_density(const struct DifflatComb *comb,
                                        double *out_re,
                                        double *out_im);

/**
 * Complement `1 - w` of an indicator comb.
 *
 * # Safety
 * `comb` must be a live handle; `out_comb` writable.
 */
enum DifflatStatus difflat_comb_complement(const struct DifflatComb *comb,
                                           struct DifflatComb **out_comb);

/**
 * One coefficient `nu(z)` averaged over the window of radius `window`.
 *
 * # Safety
 * `comb` must be a live handle; `z` must hold `dim` values; outputs writable.
 */
enum DifflatStatus difflat_autocorr_coefficient(const struct DifflatComb *comb,
                                                double window,
                                                const int64_t *z,
                                                uint32_t variant,
                                                double *out_re,
                                                double *out_im);

/**
 * Table of all coefficients with `|z| <= z_max` over the full cutoff window.
 *
 * # Safety
 * `comb` must be a live handle; `out_table` writable.
 */
enum DifflatStatus difflat_autocorr_table(const struct DifflatComb *comb,
                                          double z_max,
                                          uint32_t variant,
                                          struct DifflatAutocorr **out_table);

/**
 * Number of tabulated coefficients; 0 for NULL.
 *
 * # Safety
 * `table` must be NULL or a live handle.
 */
size_t difflat_autocorr_len(const struct DifflatAutocorr *table);

/**
 * Looks up `nu(z)`; `DIFFLAT_STATUS_OUT_OF_RANGE` if `z` is not tabulated.
 *
 * # Safety
 * `table` must be a live handle; `z` must hold `dim` values; outputs writable.
 */
enum DifflatStatus difflat_autocorr_get(const struct DifflatAutocorr *table,
                                        const int64_t *z,
                                        double *out_re,
                                        double *out_im);

/**
 * # Safety
 * `table` must come from this library and not be freed twice. NULL is ignored.
 */
void difflat_autocorr_free(struct DifflatAutocorr *table);

/**
 * `S_r(k) = sum w(t) exp(-2 pi i k.t)` at the Cartesian point `k`.
 *
 * # Safety
 * `comb` must be a live handle; `k` must hold `dim` values; outputs writable.
 */
enum DifflatStatus difflat_exp_sum(const struct DifflatComb *comb,
                                   const double *k,
                                   double *out_re,
                                   double *out_im);

/**
 * `D_r(k) = |S_r(k)|^2 / vol(B_r)`.
 *
 * # Safety
 * `comb` must be a live handle; `k` must hold `dim` values; `out_value` writable.
 */
enum DifflatStatus difflat_intensity(const struct DifflatComb *comb,
                                     const double *k,
                                     double *out_value);

/**
 * `D_r(k)` damped by a unit-mass Gaussian profile of width `sigma`.
 *
 * # Safety
 * `comb` must be a live handle; `k` must hold `dim` values; `out_value` writable.
 */
enum DifflatStatus difflat_profiled_intensity(const struct DifflatComb *comb,
                                              const double *k,
                                              double sigma,
                                              double *out_value);

/**
 * Bragg estimate `|S_r(k*) / vol(B_r)|^2` at the dual lattice point with
 * dual-basis coordinates `kstar`.
 *
 * # Safety
 * `comb` must be a live handle; `kstar` must hold `dim` values; `out_value` writable.
 */
enum DifflatStatus difflat_bragg_estimate(const struct DifflatComb *comb,
                                          const int64_t *kstar,
                                          double *out_value);

#endif  /* DIFFLAT_H */
