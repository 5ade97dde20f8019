#ifndef CFSCHED_H
#define CFSCHED_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum {
  CFS_STATUS_OK = 0,
  CFS_STATUS_NULL_POINTER = 1,
  /**
   * Bad argument: wrong length, non-finite value, k > L and so on.
   */
  CFS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Outside the domain of a formula.
   */
  CFS_STATUS_DOMAIN = 3,
  /**
   * Work would exceed the enumeration limits.
   */
  CFS_STATUS_RESOURCE = 4,
  /**
   * Caller-provided buffer is too small.
   */
  CFS_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * Internal failure; the library caught a panic.
   */
  CFS_STATUS_INTERNAL = 6,
} CfsStatus;

/**
 * Channel gains of a set of users.
 */
typedef struct CfsChannel CfsChannel;

/**
 * A chosen subset of users with its coefficient vector.
 */
typedef struct CfsSchedule CfsSchedule;

typedef struct {
  /**
   * Computation rate in bits per channel use; `INFINITY` when unbounded.
   */
  double rate;
  /**
   * MMSE scaling factor.
   */
  double alpha;
  /**
   * Angle between the channel and the coefficient vector, radians.
   */
  double angle;
  /**
   * Number of non-zero coefficients.
   */
  size_t nnz;
  /**
   * `nnz * rate`.
   */
  double sum_rate;
} CfsRateResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread. Copies at most `len - 1`
 * bytes plus a terminating NUL into `buf` and returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t cfs_last_error(char *buf, size_t len);

/**
 * Static description of a status code.
 */
const char *cfs_status_str(CfsStatus status);

/**
 * Copy `len` gains into a new channel handle.
 *
 * # Safety
 * `values` must point to `len` doubles; `out` must be writable.
 */
CfsStatus cfs_channel_new(const double *values, size_t len, CfsChannel **out_channel);

/**
 * Draw `l` i.i.d. standard normal gains from `seed`.
 *
 * # Safety
 * `out_channel` must be writable.
 */
CfsStatus cfs_channel_sample(size_t l, uint64_t seed, CfsChannel **out_channel);

/**
 * Number of users in the channel; 0 for a null handle.
 *
 * # Safety
 * `channel` must be null or a live handle.
 */
size_t cfs_channel_len(const CfsChannel *channel);

/**
 * Copy the gains into `values` (room for `len`).
 *
 * # Safety
 * `channel` must be a live handle and `values` must point to `len` doubles.
 */
CfsStatus cfs_channel_values(const CfsChannel *channel, double *values, size_t len);

/**
 * Release a channel. Null is ignored.
 *
 * # Safety
 * `channel` must be null or a handle not yet freed.
 */
void cfs_channel_free(CfsChannel *channel);

/**
 * Computation rate of `channel` with coefficients `a` at power `p`.
 *
 * # Safety
 * `channel` must be a live handle, `a` must point to `len` integers and
 * `result` must be writable.
 */
CfsStatus cfs_computation_rate(const CfsChannel *channel,
                               const int64_t *a,
                               size_t len,
                               double p,
                               CfsRateResult *result);

/**
 * Rate-optimal integer coefficients for `channel`. `a_out` needs room for
 * `cfs_channel_len(channel)` entries.
 *
 * # Safety
 * `channel` must be a live handle, `a_out` must point to `a_len` integers
 * and `result` must be writable.
 */
CfsStatus cfs_optimal_coeff(const CfsChannel *channel,
                            double p,
                            int64_t *a_out,
                            size_t a_len,
                            CfsRateResult *result);

/**
 * Sorted-window scheduler: `k` users with +-1 coefficients.
 *
 * # Safety
 * `channel` must be a live handle; `out_schedule` must be writable.
 */
CfsStatus cfs_schedule_algorithm1(const CfsChannel *channel,
                                  size_t k,
                                  double p,
                                  CfsSchedule **out_schedule);

/**
 * Exhaustive scheduler: best sum-rate over every `k`-subset and coefficient vector.
 *
 * # Safety
 * `channel` must be a live handle; `out_schedule` must be writable.
 */
CfsStatus cfs_schedule_oracle(const CfsChannel *channel,
                              size_t k,
                              double p,
                              CfsSchedule **out_schedule);

/**
 * Number of scheduled users; 0 for a null handle.
 *
 * # Safety
 * `schedule` must be null or a live handle.
 */
size_t cfs_schedule_len(const CfsSchedule *schedule);

/**
 * Copy user indices and coefficients (each `len` long, `len >=
 * cfs_schedule_len`) and the rates. Any output pointer may be null to skip it.
 *
 * # Safety
 * `schedule` must be a live handle; non-null outputs must have room for
 * `len` elements.
 */
CfsStatus cfs_schedule_get(const CfsSchedule *schedule,
                           size_t *users,
                           int64_t *coeffs,
                           size_t len,
                           double *rate,
                           double *sum_rate);

/**
 * Release a schedule. Null is ignored.
 *
 * # Safety
 * `schedule` must be null or a handle not yet freed.
 */
void cfs_schedule_free(CfsSchedule *schedule);

/**
 * Finite-`L` lower bound and upper bound on the expected sum-rate.
 *
 * # Safety
 * `lower` and `upper` must be writable.
 */
CfsStatus cfs_sumrate_bounds(uint64_t l,
                             uint32_t k,
                             double p,
                             double delta,
                             double *lower,
                             double *upper);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CFSCHED_H */
