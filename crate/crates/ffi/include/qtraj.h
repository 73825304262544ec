#ifndef QTRAJ_H
#define QTRAJ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Result code of every fallible call.
 */
typedef enum QtrajStatus {
  QTRAJ_STATUS_OK = 0,
  QTRAJ_STATUS_NULL_POINTER = 1,
  QTRAJ_STATUS_INVALID_UTF8 = 2,
  QTRAJ_STATUS_PARSE = 3,
  QTRAJ_STATUS_IO = 4,
  QTRAJ_STATUS_DIMENSION_MISMATCH = 5,
  QTRAJ_STATUS_INVALID_CHANNEL = 6,
  QTRAJ_STATUS_INVALID_RANDOMIZATION = 7,
  QTRAJ_STATUS_INVALID_DENSITY = 8,
  QTRAJ_STATUS_INVALID_STATE = 9,
  QTRAJ_STATUS_NOT_UNITARY = 10,
  QTRAJ_STATUS_NOT_IRREDUCIBLE = 11,
  QTRAJ_STATUS_OUTSIDE_SUPPORT = 12,
  QTRAJ_STATUS_KERNEL_HIT = 13,
  QTRAJ_STATUS_SINGULAR_PUSHFORWARD = 14,
  QTRAJ_STATUS_NO_CONVERGENCE = 15,
  QTRAJ_STATUS_EMPTY = 16,
  QTRAJ_STATUS_OUT_OF_RANGE = 17,
  QTRAJ_STATUS_PANIC = 99,
} QtrajStatus;

/*
 A channel together with its randomization.
 */
typedef struct QtrajChannel QtrajChannel;

/*
 Sampler and density of the GAP measure of a fixed density matrix.
 */
typedef struct QtrajGap QtrajGap;

/*
 A finitely supported probability measure on projective space.
 */
typedef struct QtrajMeasure QtrajMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static NUL-terminated string.
 */
const char *qtraj_version(void);

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *qtraj_last_error(void);

/*
 Releases a string returned by this library.

 # Safety
 `s` must be null or a string obtained from this library, freed once.
 */
void qtraj_string_free(char *s);

/*
 Parses a channel file document (JSON).

 # Safety
 `json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum QtrajStatus qtraj_channel_from_json(const char *json, struct QtrajChannel **out);

/*
 # Safety
 `ch` must be null or a handle from this library, freed once.
 */
void qtraj_channel_free(struct QtrajChannel *ch);

/*
 Hilbert space dimension, or 0 for a null handle.

 # Safety
 `ch` must be null or a live handle.
 */
size_t qtraj_channel_dim(const struct QtrajChannel *ch);

/*
 Number of Kraus operators, or 0 for a null handle.

 # Safety
 `ch` must be null or a live handle.
 */
size_t qtraj_channel_rank(const struct QtrajChannel *ch);

/*
 Ergodicity report (irreducibility, period, primitivity, invariant state)
 as a JSON string.

 # Safety
 `ch` must be a live handle and `out_json` a valid pointer.
 */
enum QtrajStatus qtraj_channel_analyze(const struct QtrajChannel *ch, char **out_json);

/*
 Runs one trajectory from `x0` and returns the retained states as an
 equally weighted measure. The same `seed` reproduces the same run.

 # Safety
 `x0_re` (and `x0_im` unless null) must hold `dim` values; `out` must be
 a valid pointer.
 */
enum QtrajStatus qtraj_channel_simulate(const struct QtrajChannel *ch,
                                        const double *x0_re,
                                        const double *x0_im,
                                        size_t dim,
                                        size_t steps,
                                        size_t burn_in,
                                        size_t thinning,
                                        uint64_t seed,
                                        struct QtrajMeasure **out);

/*
 Parses a measure CSV (`weight,re0,im0,...`; the weight column is optional).

 # Safety
 `csv` must be a NUL-terminated string; `out` a valid pointer.
 */
enum QtrajStatus qtraj_measure_from_csv(const char *csv, struct QtrajMeasure **out);

/*
 Serializes a measure as CSV.

 # Safety
 `m` must be a live handle and `out_csv` a valid pointer.
 */
enum QtrajStatus qtraj_measure_to_csv(const struct QtrajMeasure *m, char **out_csv);

/*
 # Safety
 `m` must be null or a handle from this library, freed once.
 */
void qtraj_measure_free(struct QtrajMeasure *m);

/*
 Number of atoms, or 0 for a null handle.

 # Safety
 `m` must be null or a live handle.
 */
size_t qtraj_measure_len(const struct QtrajMeasure *m);

/*
 Dimension of the atoms, or 0 for a null handle.

 # Safety
 `m` must be null or a live handle.
 */
size_t qtraj_measure_dim(const struct QtrajMeasure *m);

/*
 Copies atom `index` (canonical representative) into `re`/`im`, each of
 length `dim`, and its weight into `weight` (which may be null).

 # Safety
 `re` and `im` must hold `dim` writable values.
 */
enum QtrajStatus qtraj_measure_atom(const struct QtrajMeasure *m,
                                    size_t index,
                                    double *re,
                                    double *im,
                                    size_t dim,
                                    double *weight);

/*
 Wasserstein-1 distance under the Fubini-Study metric. With
 `subsample == 0` the distance is exact; otherwise both measures are
 first reduced to `subsample` atoms drawn with `seed`.

 # Safety
 `a`, `b` must be live handles and `out` a valid pointer.
 */
enum QtrajStatus qtraj_wasserstein1(const struct QtrajMeasure *a,
                                    const struct QtrajMeasure *b,
                                    size_t subsample,
                                    uint64_t seed,
                                    double *out);

/*
 GAP sampler for the `dim x dim` density matrix given row-major in
 `rho_re`/`rho_im` (`rho_im` may be null for a real matrix).

 # Safety
 The arrays must hold `dim * dim` values; `out` must be a valid pointer.
 */
enum QtrajStatus qtraj_gap_new(const double *rho_re,
                               const double *rho_im,
                               size_t dim,
                               struct QtrajGap **out);

/*
 GAP sampler from a density file document (JSON).

 # Safety
 `json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum QtrajStatus qtraj_gap_from_json(const char *json, struct QtrajGap **out);

/*
 # Safety
 `g` must be null or a handle from this library, freed once.
 */
void qtraj_gap_free(struct QtrajGap *g);

/*
 Density of the GAP measure at `x` with respect to the uniform measure.

 # Safety
 `x_re` (and `x_im` unless null) must hold `dim` values.
 */
enum QtrajStatus qtraj_gap_density(const struct QtrajGap *g,
                                   const double *x_re,
                                   const double *x_im,
                                   size_t dim,
                                   double *out);

/*
 `n` independent GAP samples as an equally weighted measure.

 # Safety
 `g` must be a live handle and `out` a valid pointer.
 */
enum QtrajStatus qtraj_gap_sample(const struct QtrajGap *g,
                                  size_t n,
                                  uint64_t seed,
                                  struct QtrajMeasure **out);

/*
 Runs a bundled experiment by CLI name and returns its verdict as JSON.

 # Safety
 `name` must be a NUL-terminated string; `out_json` a valid pointer.
 */
enum QtrajStatus qtraj_run_example(const char *name, uint64_t seed, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QTRAJ_H */
