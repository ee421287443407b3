#ifndef CUSPIDAL_ATLAS_H
#define CUSPIDAL_ATLAS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every exported function.
typedef enum CaStatus {
  CA_OK = 0,
  CA_NULL_POINTER = 1,
  CA_INVALID_PARAMS = 2,
  CA_CONTINUUM = 3,
  CA_ANALYSIS_FAILED = 4,
  CA_BUFFER_TOO_SMALL = 5,
  CA_PANIC = 6,
} CaStatus;

// Opaque classification report.
typedef struct CaReport CaReport;

typedef struct CaParams {
  double d3;
  double r2;
  double d4;
} CaParams;

typedef struct CaJoints {
  double theta1;
  double theta2;
  double theta3;
} CaJoints;

typedef struct CaPoint {
  double x;
  double y;
  double z;
} CaPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty if none. Valid until the
// next call into this library from the same thread.
const char *ca_last_error(void);

// Classifies a manipulator with default settings.
//
// # Safety
// `out` must be valid for writes. The handle is owned by the caller.
enum CaStatus ca_classify(struct CaParams p, struct CaReport **out);

// # Safety
// `r` must be null or a handle from [`ca_classify`] not yet freed.
void ca_report_free(struct CaReport *r);

// Number of aspects.
//
// # Safety
// `r` must be a live handle and `out` writable.
enum CaStatus ca_report_aspects(const struct CaReport *r, uint32_t *out);

// Number of cusp points in the workspace section.
//
// # Safety
// `r` must be a live handle and `out` writable.
enum CaStatus ca_report_cusps(const struct CaReport *r, uint32_t *out);

// 1 for quaternary, 0 for binary.
//
// # Safety
// `r` must be a live handle and `out` writable.
enum CaStatus ca_report_quaternary(const struct CaReport *r, int32_t *out);

// 1 when the singularity curves are generic.
//
// # Safety
// `r` must be a live handle and `out` writable.
enum CaStatus ca_report_generic(const struct CaReport *r, int32_t *out);

// Class label: `binary`, `n.g` or a homotopy signature such as `2(1,0)`.
//
// # Safety
// `r` must be a live handle, `buf` valid for `len` bytes, `needed` null or writable.
enum CaStatus ca_report_class(const struct CaReport *r,
                              char *buf,
                              uintptr_t len,
                              uintptr_t *needed);

// Full report as JSON.
//
// # Safety
// `r` must be a live handle, `buf` valid for `len` bytes, `needed` null or writable.
enum CaStatus ca_report_json(const struct CaReport *r, char *buf, uintptr_t len, uintptr_t *needed);

// Forward kinematics.
//
// # Safety
// `out` must be writable.
enum CaStatus ca_fk(struct CaParams p, struct CaJoints q, struct CaPoint *out);

// Inverse kinematics. Writes at most `cap` solutions and their total number
// to `count`; returns `CA_BUFFER_TOO_SMALL` if `cap` is short.
//
// # Safety
// `out` must be valid for `cap` elements (may be null when `cap` is 0) and `count` writable.
enum CaStatus ca_solve_ik(struct CaParams p,
                          struct CaPoint x,
                          struct CaJoints *out,
                          uintptr_t cap,
                          uintptr_t *count);

// Distinct real IK roots at the section point `(rho, z)`.
//
// # Safety
// `out` must be writable.
enum CaStatus ca_posture_count(struct CaParams p, double rho, double z, uint32_t *out);

// Values of the two separating surfaces at `p`.
//
// # Safety
// `s1` and `s2` must be writable.
enum CaStatus ca_surfaces(struct CaParams p, double *s1, double *s2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CUSPIDAL_ATLAS_H */
