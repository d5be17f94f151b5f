#ifndef DIFFINT_H
#define DIFFINT_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Interferometer selector.
 */
typedef enum DiffintInterferometer {
  DIFFINT_INTERFEROMETER_MACH_ZEHNDER_Y = 0,
  DIFFINT_INTERFEROMETER_BEAM_SPLITTER_Z = 1,
} DiffintInterferometer;

/**
 * Result code of every fallible call.
 */
typedef enum DiffintStatus {
  DIFFINT_STATUS_OK = 0,
  DIFFINT_STATUS_NULL_POINTER = 1,
  DIFFINT_STATUS_INVALID_ARGUMENT = 2,
  DIFFINT_STATUS_NOT_NORMALIZED = 3,
  DIFFINT_STATUS_DIMENSION_MISMATCH = 4,
  DIFFINT_STATUS_NUMERICAL = 5,
  DIFFINT_STATUS_DIMENSION_GUARD = 6,
  DIFFINT_STATUS_IO = 7,
  DIFFINT_STATUS_PARSE = 8,
  DIFFINT_STATUS_PANIC = 9,
} DiffintStatus;

/**
 * A phase-noise density on [-pi, pi].
 */
typedef struct DiffintNoise DiffintNoise;

/**
 * A normalized single-interferometer probe.
 */
typedef struct DiffintState DiffintState;

/**
 * Joint outcome table of two probes under a shared total noise.
 */
typedef struct DiffintTable DiffintTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t diffint_last_error(char *buf, size_t len);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum DiffintStatus diffint_state_twin_fock(size_t n, struct DiffintState **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum DiffintStatus diffint_state_coherent(size_t n, struct DiffintState **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum DiffintStatus diffint_state_noon(size_t n, struct DiffintState **out);

/**
 * Ground state of the two-mode Hamiltonian at interaction strength `lambda`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum DiffintStatus diffint_state_adiabatic(size_t n, double lambda, struct DiffintState **out);

/**
 * One-axis-twisted state at dimensionless time `tau`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum DiffintStatus diffint_state_diabatic(size_t n, double tau, struct DiffintState **out);

/**
 * Probe from N + 1 Jz-basis amplitudes, ascending in eigenvalue. The
 * amplitudes must already be normalized.
 *
 * # Safety
 * `re` and `im` must point to `n + 1` readable doubles; `out` must be valid.
 */
enum DiffintStatus diffint_state_from_amplitudes(size_t n,
                                                 const double *re,
                                                 const double *im,
                                                 struct DiffintState **out);

/**
 * # Safety
 * `state` must be null or a handle from a `diffint_state_*` constructor.
 */
void diffint_state_free(struct DiffintState *state);

/**
 * Number of particles, or 0 for a null handle.
 *
 * # Safety
 * `state` must be null or a valid handle.
 */
size_t diffint_state_particles(const struct DiffintState *state);

/**
 * Copies the N + 1 amplitudes into `re` and `im`.
 *
 * # Safety
 * `re` and `im` must point to `len` writable doubles.
 */
enum DiffintStatus diffint_state_amplitudes(const struct DiffintState *state,
                                            double *re,
                                            double *im,
                                            size_t len);

/**
 * Noise from a token: `delta`, `flat`, a von Mises width, or
 * `multi:M:sigma:seed`.
 *
 * # Safety
 * `token` must be a NUL-terminated string; `out` must be valid.
 */
enum DiffintStatus diffint_noise_from_token(const char *token, struct DiffintNoise **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum DiffintStatus diffint_noise_von_mises(double sigma, struct DiffintNoise **out);

/**
 * # Safety
 * `noise` must be null or a handle from a `diffint_noise_*` constructor.
 */
void diffint_noise_free(struct DiffintNoise *noise);

/**
 * Builds the joint outcome table of `probe1` (carrying theta) and
 * `probe2` under a shared total noise; the relative noise is a point mass.
 *
 * # Safety
 * All pointers must be valid handles; `out` must be valid.
 */
enum DiffintStatus diffint_table_build(const struct DiffintState *probe1,
                                       const struct DiffintState *probe2,
                                       enum DiffintInterferometer interferometer,
                                       const struct DiffintNoise *noise_total,
                                       struct DiffintTable **out);

/**
 * # Safety
 * `table` must be null or a handle from [`diffint_table_build`].
 */
void diffint_table_free(struct DiffintTable *table);

/**
 * P(mu1, mu2 | theta); outcomes are indexed 0..=N.
 *
 * # Safety
 * `table` must be a valid handle and `out` a valid pointer.
 */
enum DiffintStatus diffint_table_probability(const struct DiffintTable *table,
                                             size_t mu1,
                                             size_t mu2,
                                             double theta,
                                             double *out);

/**
 * Fisher information F(theta).
 *
 * # Safety
 * `table` must be a valid handle and `out` a valid pointer.
 */
enum DiffintStatus diffint_table_fisher(const struct DiffintTable *table,
                                        double theta,
                                        double *out);

/**
 * Maximizes F over theta in [0, 2 pi) on a `points` grid refined to
 * `tolerance` (fraction of the period).
 *
 * # Safety
 * `table` must be a valid handle; `theta` and `fisher` valid pointers.
 */
enum DiffintStatus diffint_table_maximize(const struct DiffintTable *table,
                                          size_t points,
                                          double tolerance,
                                          double *theta,
                                          double *fisher);

/**
 * Optimal theta and Fisher information of the NOON pair under the given
 * total and relative noises.
 *
 * # Safety
 * Noise handles must be valid; `theta` and `fisher` valid pointers.
 */
enum DiffintStatus diffint_noon_fisher(size_t n,
                                       const struct DiffintNoise *noise_total,
                                       const struct DiffintNoise *noise_relative,
                                       double *theta,
                                       double *fisher);

/**
 * Quantum Fisher information of the noise-averaged product of two copies
 * of `probe`. Limited to small N.
 *
 * # Safety
 * Handles must be valid and `out` a valid pointer.
 */
enum DiffintStatus diffint_effective_qfi(const struct DiffintState *probe,
                                         enum DiffintInterferometer interferometer,
                                         const struct DiffintNoise *noise_total,
                                         const struct DiffintNoise *noise_relative,
                                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIFFINT_H */
