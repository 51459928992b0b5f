#ifndef WQED_H
#define WQED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WqedBandgap {
  WQED_BANDGAP_LOWER = 0,
  WQED_BANDGAP_MIDDLE = 1,
  WQED_BANDGAP_UPPER = 2,
} WqedBandgap;

typedef enum WqedPair {
  WQED_PAIR_AB = 0,
  WQED_PAIR_BA = 1,
  WQED_PAIR_AA = 2,
  WQED_PAIR_BB = 3,
} WqedPair;

typedef enum WqedPairKind {
  WQED_PAIR_KIND_INTRA = 0,
  WQED_PAIR_KIND_INTER = 1,
} WqedPairKind;

typedef enum WqedSchedule {
  WQED_SCHEDULE_UNIFORM = 0,
  WQED_SCHEDULE_HS = 1,
  WQED_SCHEDULE_MIN_MATRIX_ELEMENT = 2,
} WqedSchedule;

typedef enum WqedStatus {
  WQED_STATUS_OK = 0,
  WQED_STATUS_NULL_POINTER = 1,
  WQED_STATUS_INVALID_ARGUMENT = 2,
  // A solver did not converge, a gap closed, or a similar numerical failure.
  WQED_STATUS_NUMERICAL = 3,
  // The problem is too large for the requested method.
  WQED_STATUS_TOO_LARGE = 4,
  // A Rust panic was caught at the boundary; the library state is intact.
  WQED_STATUS_PANIC = 5,
} WqedStatus;

// Opaque coupling matrix of an `N`-spin chain.
typedef struct WqedCouplings WqedCouplings;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a
// successful call. The pointer stays valid until the next call into the
// library from the same thread.
const char *wqed_last_error_message(void);

// Library version as a static nul-terminated string.
const char *wqed_version(void);

// Effective coupling `J_n^{pair}` in units of `J~` (middle gap with positive detuning sign).
//
// # Safety
// `out` must be null or point to writable memory for one `double`.
enum WqedStatus wqed_coupling_constant(enum WqedBandgap bandgap,
                                       double xi,
                                       double dimerization,
                                       uint32_t n,
                                       enum WqedPair pair,
                                       double *out);

// Builds the coupling matrix of `n` spins. Free it with [`wqed_couplings_free`].
//
// # Safety
// `out` must be null or point to writable memory for one pointer.
enum WqedStatus wqed_couplings_new(enum WqedBandgap bandgap,
                                   double xi,
                                   double dimerization,
                                   size_t n,
                                   bool periodic,
                                   struct WqedCouplings **out);

// Releases a handle from [`wqed_couplings_new`]. Null is ignored.
//
// # Safety
// `h` must be null or a live handle not used afterwards.
void wqed_couplings_free(struct WqedCouplings *h);

// # Safety
// `h` must be a live handle; `out` as in [`wqed_coupling_constant`].
enum WqedStatus wqed_couplings_size(const struct WqedCouplings *h, size_t *out);

// Entry `J_ij`.
//
// # Safety
// `h` must be a live handle; `out` as in [`wqed_coupling_constant`].
enum WqedStatus wqed_couplings_get(const struct WqedCouplings *h, size_t i, size_t j, double *out);

// Lowest energy of every magnetization sector at angle `theta`, written
// to `out[n_up]` for `n_up = 0..=N`. `len` must be at least `N + 1`.
//
// # Safety
// `h` must be a live handle and `out` must point to `len` writable doubles.
enum WqedStatus wqed_sector_energies(const struct WqedCouplings *h,
                                     double theta,
                                     double *out,
                                     size_t len);

// Berry phase in `[0, 2 pi)` of the `d`-fold ground multiplet under a
// twist of one bond (periodic chains only).
//
// # Safety
// `h` must be a live handle; `out` as in [`wqed_coupling_constant`].
enum WqedStatus wqed_berry_phase(const struct WqedCouplings *h,
                                 size_t n_up,
                                 double theta,
                                 enum WqedPairKind kind,
                                 size_t d,
                                 double *out);

// Infidelity of the adiabatic preparation of the `n_up` ground state over
// total time `total_time`, starting from the lowest Ising configuration.
//
// # Safety
// `h` must be a live handle; `out` as in [`wqed_coupling_constant`].
enum WqedStatus wqed_adiabatic_infidelity(const struct WqedCouplings *h,
                                          size_t n_up,
                                          enum WqedSchedule schedule,
                                          double total_time,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WQED_H */
