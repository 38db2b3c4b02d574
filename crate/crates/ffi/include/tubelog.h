#ifndef TUBELOG_H
#define TUBELOG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The non-zero values of the command-line exit codes are
 * reused for the matching failures.
 */
typedef enum TlStatus {
  TL_STATUS_OK = 0,
  TL_STATUS_INVALID_INPUT = 1,
  TL_STATUS_NON_GENERIC = 2,
  TL_STATUS_NUMERICAL = 3,
  TL_STATUS_NULL_POINTER = 4,
  TL_STATUS_OUT_OF_RANGE = 5,
  TL_STATUS_PANIC = 6,
} TlStatus;

/**
 * Opaque surface blueprint together with the data needed to serialize it.
 */
typedef struct TlBlueprint TlBlueprint;

/**
 * Opaque analyzed rational form.
 */
typedef struct TlForm TlForm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *tl_last_error(void);

/**
 * Parses an expression in `z`, a JSON coefficient document, or
 * `random:<n>` (drawn from `seed`) and analyzes it with genericity
 * tolerance `tol`.
 *
 * # Safety
 * `input` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TlStatus tl_form_parse(const char *input, uint64_t seed, double tol, struct TlForm **out);

/**
 * Builds `sum residues[j] / (z - poles[j])` from `n` poles and residues,
 * each given as interleaved `re, im` pairs (`2 n` doubles).
 *
 * # Safety
 * `poles` and `residues` must point to `2 n` doubles; `out` must be valid.
 */
enum TlStatus tl_form_from_residues(const double *poles,
                                    const double *residues,
                                    size_t n,
                                    double tol,
                                    struct TlForm **out);

/**
 * # Safety
 * `form` must come from a `tl_form_*` constructor and not be used again.
 */
void tl_form_free(struct TlForm *form);

/**
 * Number of finite poles, or 0 for a null handle.
 *
 * # Safety
 * `form` must be a live handle or NULL.
 */
size_t tl_form_degree(const struct TlForm *form);

/**
 * Number of distinct finite zeroes, or 0 for a null handle.
 *
 * # Safety
 * `form` must be a live handle or NULL.
 */
size_t tl_form_zero_count(const struct TlForm *form);

/**
 * 1 when every genericity condition holds, 0 otherwise.
 *
 * # Safety
 * `form` must be a live handle or NULL.
 */
int32_t tl_form_is_generic(const struct TlForm *form);

/**
 * Pole `j` and its residue.
 *
 * # Safety
 * `form` must be a live handle; the four out-pointers must be valid.
 */
enum TlStatus tl_form_pole(const struct TlForm *form,
                           size_t j,
                           double *pole_re,
                           double *pole_im,
                           double *residue_re,
                           double *residue_im);

/**
 * Canonical JSON of poles, residues, zeroes and the genericity report.
 *
 * # Safety
 * `form` must be a live handle and `out` valid; free the string with
 * [`tl_string_free`].
 */
enum TlStatus tl_form_analyze_json(const struct TlForm *form, char **out);

/**
 * Runs petals, geodesic tree and assembly. `mesh_resolution` of 0 selects
 * the default. Non-generic forms fail with `TL_STATUS_NON_GENERIC`.
 *
 * # Safety
 * `form` must be a live handle and `out` valid.
 */
enum TlStatus tl_blueprint_build(const struct TlForm *form,
                                 size_t mesh_resolution,
                                 struct TlBlueprint **out);

/**
 * # Safety
 * `bp` must come from [`tl_blueprint_build`] and not be used again.
 */
void tl_blueprint_free(struct TlBlueprint *bp);

/**
 * Number of polygon sides, or 0 for a null handle.
 *
 * # Safety
 * `bp` must be a live handle or NULL.
 */
size_t tl_blueprint_side_count(const struct TlBlueprint *bp);

/**
 * Side `i` of the developed polygon as a complex vector.
 *
 * # Safety
 * `bp` must be a live handle; `re` and `im` must be valid.
 */
enum TlStatus tl_blueprint_side(const struct TlBlueprint *bp, size_t i, double *re, double *im);

/**
 * Hexagon case (1 or 2) for degree four, 0 when undecided or for other
 * degrees.
 *
 * # Safety
 * `bp` must be a live handle or NULL.
 */
int32_t tl_blueprint_hexagon_case(const struct TlBlueprint *bp);

/**
 * 1 when every invariant check of the blueprint passed, 0 otherwise.
 *
 * # Safety
 * `bp` must be a live handle or NULL.
 */
int32_t tl_blueprint_checks_pass(const struct TlBlueprint *bp);

/**
 * Canonical blueprint JSON, identical to the command-line output.
 *
 * # Safety
 * `bp` must be a live handle and `out` valid; free the string with
 * [`tl_string_free`].
 */
enum TlStatus tl_blueprint_json(const struct TlBlueprint *bp, char **out);

/**
 * # Safety
 * `s` must be a string returned by this library, or NULL.
 */
void tl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TUBELOG_H */
