#ifndef HAANTJES_H
#define HAANTJES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HjStatus {
  HJ_STATUS_OK = 0,
  /**
   * A null pointer, bad UTF-8 or an out-of-range argument.
   */
  HJ_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The manifest or a flag was rejected (CLI exit code 2).
   */
  HJ_STATUS_MANIFEST_ERROR = 2,
  /**
   * A numerical precondition or computation failed (CLI exit code 1).
   */
  HJ_STATUS_NUMERICAL_ERROR = 3,
  /**
   * The output buffer is too small; the required length was written.
   */
  HJ_STATUS_BUFFER_TOO_SMALL = 4,
  HJ_STATUS_INTERNAL = 5,
} HjStatus;

typedef enum HjTorsionKind {
  HJ_TORSION_KIND_NIJENHUIS = 0,
  HJ_TORSION_KIND_HAANTJES = 1,
  HJ_TORSION_KIND_YANO_AKO = 2,
} HjTorsionKind;

/**
 * A parsed manifest.
 */
typedef struct HjManifest HjManifest;

/**
 * A certificate report with its JSON rendering.
 */
typedef struct HjReport HjReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *hj_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hj_version(void);

/**
 * Load a manifest from a file path or packaged scenario name.
 *
 * # Safety
 * `path_or_name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HjStatus hj_manifest_load(const char *path_or_name, struct HjManifest **out);

/**
 * Parse manifest TOML text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HjStatus hj_manifest_parse(const char *text, struct HjManifest **out);

/**
 * Chart dimension, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t hj_manifest_dim(const struct HjManifest *m);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void hj_manifest_free(struct HjManifest *m);

/**
 * Run the manifest's checks. `points`, `seed` and `tol` override the
 * manifest when positive (seed: when `use_seed` is nonzero).
 *
 * # Safety
 * `m` must be a live handle and `out` a valid pointer.
 */
enum HjStatus hj_check(const struct HjManifest *m,
                       size_t points,
                       int32_t use_seed,
                       uint64_t seed,
                       double tol,
                       struct HjReport **out);

/**
 * 1 when the overall verdict is PASS, 0 otherwise (also for null).
 *
 * # Safety
 * `r` must be null or a live handle.
 */
int32_t hj_report_passed(const struct HjReport *r);

/**
 * JSON text of the report, owned by the handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
const char *hj_report_json(const struct HjReport *r);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void hj_report_free(struct HjReport *r);

/**
 * Components of a torsion of field `field` at `point` (length `dim`),
 * written to `out` in row-major order: `n³` values `T^i_{jl}` at
 * `(i*n + j)*n + l` for Nijenhuis and Haantjes, `n⁵` values for Yano-Ako.
 * `written` receives the number of components, also when `out` is too small.
 *
 * # Safety
 * `m` must be a live handle, `field` a NUL-terminated string, `point` valid
 * for `dim` reads, `out` valid for `cap` writes (or null with `cap == 0`),
 * and `written` a valid pointer.
 */
enum HjStatus hj_torsion(const struct HjManifest *m,
                         const char *field,
                         enum HjTorsionKind kind,
                         const double *point,
                         size_t dim,
                         int32_t enforce_pre,
                         double tol,
                         double *out,
                         size_t cap,
                         size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAANTJES_H */
