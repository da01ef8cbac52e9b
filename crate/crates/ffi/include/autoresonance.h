#ifndef AUTORESONANCE_H
#define AUTORESONANCE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Closed form used for ρ² and υ.
typedef enum ArConstantVariant {
  AR_CONSTANT_VARIANT_PLAIN = 0,
  AR_CONSTANT_VARIANT_LN2 = 1,
  AR_CONSTANT_VARIANT_REFLECTED = 2,
} ArConstantVariant;

typedef enum ArStatus {
  AR_STATUS_OK = 0,
  AR_STATUS_NULL_POINTER = 1,
  AR_STATUS_INVALID_INPUT = 2,
  AR_STATUS_OUT_OF_DOMAIN = 3,
  AR_STATUS_NUMERIC_FAILURE = 4,
  AR_STATUS_NOT_CAPTURED = 5,
  AR_STATUS_BUFFER_TOO_SMALL = 6,
  AR_STATUS_IO = 7,
  AR_STATUS_PANIC = 8,
} ArStatus;

// Opaque trajectory.
typedef struct ArTrajectory ArTrajectory;

// Equilibrium of the frozen system. `kind` is 0 for a center, 1 for a saddle.
typedef struct ArEquilibrium {
  double re;
  double im;
  uint8_t kind;
  uint8_t family;
} ArEquilibrium;

// Connection data. Undefined entries (special phase) are NaN, and
// `branch_j` is 0.
typedef struct ArConnection {
  double p_re;
  double p_im;
  bool special;
  double rho2;
  double upsilon;
  double a00;
  double phi00;
  uint8_t branch_j;
} ArConnection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the
// next failing call on the same thread.
const char *ar_last_error(void);

// Integrates the detuned equation from φ(θ0) = re + i·im. `tol` = 0
// keeps the default tolerance.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum ArStatus ar_simulate(double eps,
                          double theta0,
                          double theta1,
                          double re,
                          double im,
                          double tol,
                          struct ArTrajectory **out);

// Same as [`ar_simulate`] but starts on the pre-capture WKB solution
// with amplitude `alpha10` and phase `phi10`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum ArStatus ar_simulate_wkb(double eps,
                              double theta0,
                              double theta1,
                              double alpha10,
                              double phi10,
                              double tol,
                              struct ArTrajectory **out);

// Integrates the layer equation v'' = zv − 2v³ from its −∞ data seeded at
// `z0` up to `z1`. States are (v, v').
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum ArStatus ar_painleve(double alpha,
                          double phi,
                          double z0,
                          double z1,
                          double tol,
                          struct ArTrajectory **out);

// Number of samples; 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle.
size_t ar_trajectory_len(const struct ArTrajectory *traj);

// Copies up to `cap` samples: abscissae into `points` and the two state
// components interleaved into `states` (2·cap entries). Fails with
// `BufferTooSmall` when `cap` is less than the length.
//
// # Safety
// `traj` must be a live handle; `points` and `states` must hold `cap` and
// `2·cap` doubles.
enum ArStatus ar_trajectory_copy(const struct ArTrajectory *traj,
                                 double *points,
                                 double *states,
                                 size_t cap);

// Capture time by the default criterion. `*captured` is false and
// `*theta_capture` NaN when the run is not captured.
//
// # Safety
// `traj` must be a live handle from [`ar_simulate`] or
// [`ar_simulate_wkb`]; the out-pointers must be writable.
enum ArStatus ar_detect_capture(const struct ArTrajectory *traj,
                                bool *captured,
                                double *theta_capture);

// Releases a handle. Null is ignored.
//
// # Safety
// `traj` must be null or a handle not yet freed.
void ar_trajectory_free(struct ArTrajectory *traj);

// Equilibria of the frozen system at `t_const`. At most `cap` are
// written; `*count` receives the total (at most 5).
//
// # Safety
// `out` must hold `cap` entries; `count` must be writable.
enum ArStatus ar_equilibria(double t_const, struct ArEquilibrium *out, size_t cap, size_t *count);

// Connection data for layer parameters (α̃, φ̃) with identity matching.
//
// # Safety
// `out` must be writable.
enum ArStatus ar_connect(double alpha,
                         double phi,
                         enum ArConstantVariant variant,
                         struct ArConnection *out);

// The two phases at which amplitude `alpha` leads to decay.
//
// # Safety
// `out` must hold two doubles.
enum ArStatus ar_special_phases(double alpha, double *out);

// arg Γ(ix) in (−π, π].
//
// # Safety
// `out` must be writable.
enum ArStatus ar_arg_gamma_imag(double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AUTORESONANCE_H */
