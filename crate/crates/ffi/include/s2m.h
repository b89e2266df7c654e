#ifndef S2M_H
#define S2M_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Normalization used by [`s2m_pair_esq`] and [`s2m_pair_normalization`].
 */
#define S2M_METHOD_LIMIT 0

#define S2M_METHOD_RATIO 1

/**
 * Result code of every fallible call.
 */
typedef enum S2mStatus {
  S2M_STATUS_OK = 0,
  S2M_STATUS_NULL_POINTER = 1,
  S2M_STATUS_INVALID_ARGUMENT = 2,
  S2M_STATUS_PARSE = 3,
  S2M_STATUS_BUFFER_TOO_SMALL = 4,
  S2M_STATUS_POLE_PROXIMITY = 5,
  S2M_STATUS_NUMERICAL = 6,
  S2M_STATUS_PANIC = 7,
} S2mStatus;

/**
 * A Dirichlet problem `-u'' + V u` on `[a, b]`.
 */
typedef struct S2mProblem S2mProblem;

/**
 * Full and split spectra for one split point, guarded and labelled.
 */
typedef struct S2mSpectraPair S2mSpectraPair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *s2m_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *s2m_version(void);

/**
 * Creates a problem on `[a, b]`. `potential_json` uses the same JSON form as
 * the CLI config (`{"type": "polynomial", "coeffs": [0, 1]}`); null means `V = 0`.
 * `grid_size` of 0 selects the default mesh.
 *
 * # Safety
 * `potential_json` must be null or a valid NUL-terminated string, and `out`
 * must be a valid pointer.
 */
enum S2mStatus s2m_problem_new(double a,
                               double b,
                               const char *potential_json,
                               size_t grid_size,
                               struct S2mProblem **out);

/**
 * # Safety
 * `problem` must be null or a handle from [`s2m_problem_new`] not yet freed.
 */
void s2m_problem_free(struct S2mProblem *problem);

/**
 * Writes the lowest `k` Dirichlet eigenvalues into `out[0..k]`.
 *
 * # Safety
 * `problem` must be a live handle and `out` must point to `len` doubles.
 */
enum S2mStatus s2m_dirichlet_eigenvalues(const struct S2mProblem *problem,
                                         size_t k,
                                         double *out,
                                         size_t len);

/**
 * Distinct eigenvalues of the split operator at `x0` holding `k` entries
 * with multiplicity. `values` and `multiplicities` receive up to `len`
 * entries; the number written goes to `*written`.
 *
 * # Safety
 * `problem` must be a live handle; `values` and `multiplicities` must point
 * to `len` elements and `written` must be valid.
 */
enum S2mStatus s2m_split_eigenvalues(const struct S2mProblem *problem,
                                     double x0,
                                     size_t k,
                                     double *values,
                                     uint8_t *multiplicities,
                                     size_t len,
                                     size_t *written);

/**
 * Diagonal Green's function `G(z, x0, x0)`, refusing `z` near an eigenvalue.
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer.
 */
enum S2mStatus s2m_green_diag(const struct S2mProblem *problem, double z, double x0, double *out);

/**
 * Computes both spectra of `problem` at `x0` with truncation `k`.
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer.
 */
enum S2mStatus s2m_pair_new(const struct S2mProblem *problem,
                            double x0,
                            size_t k,
                            struct S2mSpectraPair **out);

/**
 * Closed-form pair for `V = 0` on `[a, b]`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum S2mStatus s2m_pair_new_free(double a,
                                 double b,
                                 double x0,
                                 size_t k,
                                 struct S2mSpectraPair **out);

/**
 * # Safety
 * `pair` must be null or a handle from an `s2m_pair_new*` call not yet freed.
 */
void s2m_pair_free(struct S2mSpectraPair *pair);

/**
 * The normalization constant `C(x0) = G(0, x0, x0)` by either method.
 *
 * # Safety
 * `pair` must be a live handle and `out` a valid pointer.
 */
enum S2mStatus s2m_pair_normalization(const struct S2mSpectraPair *pair,
                                      uint32_t method,
                                      double *out);

/**
 * Squared normalized eigenfunction `e_k(x0)²` and its tail estimate.
 * `tail` may be null.
 *
 * # Safety
 * `pair` must be a live handle, `esq` a valid pointer, `tail` null or valid.
 */
enum S2mStatus s2m_pair_esq(const struct S2mSpectraPair *pair,
                            size_t k,
                            uint32_t method,
                            double *esq,
                            double *tail);

/**
 * Eigenvector components `|v_{k,l}|²` of a Hermitian `n × n` matrix from
 * eigenvalues alone. `re` and `im` are row-major (`im` may be null for a
 * real matrix). Cell `(k, l)` lands at `out[(k-1)*n + (l-1)]`, with NaN for
 * non-generic cells, and `generic` (may be null) receives 1 or 0 per cell.
 *
 * # Safety
 * `re` must point to `n*n` doubles, `im` to `n*n` doubles or be null, and
 * `out`/`generic` to `len` elements.
 */
enum S2mStatus s2m_matrix_components(size_t n,
                                     const double *re,
                                     const double *im,
                                     double *out,
                                     uint8_t *generic,
                                     size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* S2M_H */
