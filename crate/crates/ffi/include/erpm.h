/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef ERPM_H
#define ERPM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes of every fallible function.
 */
typedef enum ErpmStatus {
  ERPM_STATUS_OK = 0,
  ERPM_STATUS_NULL_POINTER = 1,
  ERPM_STATUS_INVALID_INPUT = 2,
  ERPM_STATUS_INVALID_PARAMETER = 3,
  ERPM_STATUS_IO = 4,
  /*
   Every singular value was zero.
   */
  ERPM_STATUS_DEGENERATE = 5,
  /*
   The neighborhood graph had several components.
   */
  ERPM_STATUS_DISCONNECTED = 6,
  ERPM_STATUS_NUMERICAL = 7,
  /*
   A Rust panic was caught at the boundary.
   */
  ERPM_STATUS_PANIC = 8,
} ErpmStatus;

/*
 Dimensionality reduction methods.
 */
typedef enum ErpmMethod {
  ERPM_METHOD_PCA = 0,
  ERPM_METHOD_KPCA2 = 1,
  ERPM_METHOD_LLE = 2,
  ERPM_METHOD_HLLE = 3,
  ERPM_METHOD_ISOMAP = 4,
  ERPM_METHOD_INFO_LLE = 5,
  ERPM_METHOD_IDENTITY = 6,
} ErpmMethod;

/*
 Opaque point matrix.
 */
typedef struct ErpmMatrix ErpmMatrix;

/*
 Opaque evaluation report.
 */
typedef struct ErpmReport ErpmReport;

/*
 Global metrics of a report.
 */
typedef struct ErpmGlobals {
  double w_n;
  double w_v;
  double r_procrustes;
  double r_delta_h;
  size_t degenerate_count;
} ErpmGlobals;

/*
 Metrics of one neighborhood; NaN marks an undefined value.
 */
typedef struct ErpmLocal {
  size_t point_index;
  double delta_h;
  double procrustes_local;
  bool degenerate;
} ErpmLocal;

/*
 Spectral entropy of a matrix and its decomposition `entropy = ln(stable_rank) - epsilon_term`.
 */
typedef struct ErpmEntropy {
  double stable_rank;
  double epsilon_term;
  double entropy;
} ErpmEntropy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL after a success.

 The string stays valid until the next call into this library on the same thread.
 */
const char *erpm_last_error(void);

/*
 Copies a row-major `rows x cols` array into a new matrix.
 */
enum ErpmStatus erpm_matrix_new(size_t rows,
                                size_t cols,
                                const double *data,
                                struct ErpmMatrix **out);

/*
 Reads a numeric CSV (optional header row) into a new matrix.
 */
enum ErpmStatus erpm_matrix_load_csv(const char *path, struct ErpmMatrix **out);

/*
 Number of rows, or 0 for NULL.
 */
size_t erpm_matrix_rows(const struct ErpmMatrix *m);

/*
 Number of columns, or 0 for NULL.
 */
size_t erpm_matrix_cols(const struct ErpmMatrix *m);

/*
 Copies the entries row-major into `buf`, which must hold at least `rows * cols` values.
 */
enum ErpmStatus erpm_matrix_copy_data(const struct ErpmMatrix *m, double *buf, size_t len);

void erpm_matrix_free(struct ErpmMatrix *m);

/*
 Samples an S-curve; `truth` may be NULL, otherwise it receives the `n x 2` intrinsic coordinates.
 */
enum ErpmStatus erpm_s_curve(size_t n,
                             double noise,
                             uint64_t seed,
                             struct ErpmMatrix **points,
                             struct ErpmMatrix **truth);

/*
 Reduces `x` to `target_dim` dimensions. `method` is an [`ErpmMethod`] value;
 `k` is ignored by methods without a neighborhood graph.
 */
enum ErpmStatus erpm_reduce(const struct ErpmMatrix *x,
                            int32_t method,
                            size_t target_dim,
                            size_t k,
                            struct ErpmMatrix **out);

/*
 Evaluates embedding `y` of `x` with `k`-neighborhoods.
 */
enum ErpmStatus erpm_evaluate(const struct ErpmMatrix *x,
                              const struct ErpmMatrix *y,
                              size_t k,
                              struct ErpmReport **out);

enum ErpmStatus erpm_report_globals(const struct ErpmReport *r, struct ErpmGlobals *out);

/*
 Number of per-point records, or 0 for NULL.
 */
size_t erpm_report_len(const struct ErpmReport *r);

enum ErpmStatus erpm_report_local(const struct ErpmReport *r, size_t index, struct ErpmLocal *out);

void erpm_report_free(struct ErpmReport *r);

/*
 Spectral entropy of a row-major `rows x cols` matrix.
 */
enum ErpmStatus erpm_spectral_entropy(size_t rows,
                                      size_t cols,
                                      const double *data,
                                      struct ErpmEntropy *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERPM_H */
