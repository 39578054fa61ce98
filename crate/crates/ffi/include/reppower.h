#ifndef REPPOWER_H
#define REPPOWER_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RP_METHOD_CP 0

#define RP_METHOD_PP 1

#define RP_METHOD_FBP 2

#define RP_METHOD_CBP 3

#define RP_METHOD_CPI 4

#define RP_METHOD_IPPI 5

#define RP_METHOD_PPI 6

typedef enum RpStatus {
  RP_STATUS_OK = 0,
  RP_STATUS_NULL_POINTER = 1,
  RP_STATUS_DOMAIN = 2,
  RP_STATUS_DEGENERATE = 3,
  RP_STATUS_INFEASIBLE = 4,
  RP_STATUS_BELOW_MINIMUM = 5,
  RP_STATUS_INVALID_SPEC = 6,
  RP_STATUS_PARSE = 7,
  RP_STATUS_INVARIANT = 8,
  RP_STATUS_MISSING_FIELD = 9,
  RP_STATUS_IO = 10,
  RP_STATUS_OUT_OF_RANGE = 11,
  RP_STATUS_PANIC = 12,
} RpStatus;

/**
 * Significance level, shrinkage and tail.
 */
typedef struct RpConfig RpConfig;

/**
 * A loaded replication-project dataset.
 */
typedef struct RpDataset RpDataset;

typedef struct RpPower {
  double power;
  double supremum;
  bool feasible_100;
} RpPower;

typedef struct RpSolution {
  double c;
  /**
   * NaN for design-time methods.
   */
  double f;
  double power;
  bool degenerate;
} RpSolution;

typedef struct RpSimEstimate {
  double estimate;
  double std_err;
} RpSimEstimate;

typedef struct RpInterimRow {
  /**
   * Owned by the dataset; valid until it is freed.
   */
  const char *study;
  double c;
  double f;
  double cpi;
  double ippi;
  double ppi;
} RpInterimRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL,
 * or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rp_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rp_version(void);

/**
 * Creates a configuration. `two_sided` non-zero also counts significance in
 * the opposite direction.
 *
 * # Safety
 * `out` must be a valid pointer; the handle is freed with [`rp_config_free`].
 */
enum RpStatus rp_config_new(double alpha,
                            double shrinkage,
                            int32_t two_sided,
                            struct RpConfig **out);

/**
 * # Safety
 * `cfg` must be null or a handle from [`rp_config_new`], freed at most once.
 */
void rp_config_free(struct RpConfig *cfg);

/**
 * Design-time power (CP, PP, FBP or CBP).
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum RpStatus rp_fixed_power(const struct RpConfig *cfg,
                             uint32_t method_code,
                             double t_o,
                             double c,
                             struct RpPower *out);

/**
 * Interim power (CPi, IPPi or PPi).
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum RpStatus rp_interim_power(const struct RpConfig *cfg,
                               uint32_t method_code,
                               double t_o,
                               double t_i,
                               double c,
                               double f,
                               struct RpPower *out);

/**
 * Smallest `c ≥ c_lower` reaching `target`. `t_i` and `ni_ratio`
 * (`n_i / n_o`) are used by interim methods only.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum RpStatus rp_solve_c(const struct RpConfig *cfg,
                         uint32_t method_code,
                         double target,
                         double t_o,
                         double t_i,
                         double ni_ratio,
                         double c_lower,
                         struct RpSolution *out);

/**
 * Monte-Carlo estimate of a power. `t_i` and `f` are ignored by the
 * design-time methods.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum RpStatus rp_simulate(const struct RpConfig *cfg,
                          uint32_t method_code,
                          double t_o,
                          double t_i,
                          double c,
                          double f,
                          uint64_t n_sims,
                          uint64_t seed,
                          struct RpSimEstimate *out);

/**
 * Loads a dataset from `path`, or the bundled copy when `path` is null.
 *
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` a valid pointer.
 */
enum RpStatus rp_dataset_load(const char *path, struct RpDataset **out);

/**
 * Number of studies; 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t rp_dataset_len(const struct RpDataset *ds);

/**
 * Number of studies with a stage-2 result; rows of the interim-power table.
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t rp_dataset_continued_len(const struct RpDataset *ds);

/**
 * Interim powers of the `index`-th continued study.
 *
 * # Safety
 * `ds` must be a live handle and `out` a valid pointer.
 */
enum RpStatus rp_dataset_interim_row(const struct RpDataset *ds,
                                     size_t index,
                                     struct RpInterimRow *out);

/**
 * # Safety
 * `ds` must be null or a handle from [`rp_dataset_load`], freed at most once.
 */
void rp_dataset_free(struct RpDataset *ds);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* REPPOWER_H */
