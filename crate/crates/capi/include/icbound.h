/* C ABI for icbound: certified information-complexity lower bounds. */

#ifndef ICBOUND_H
#define ICBOUND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum IcbStatus {
  ICB_STATUS_OK = 0,
  // A required pointer argument was null.
  ICB_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  ICB_STATUS_INVALID_UTF8 = 2,
  // Input text failed to parse or validate.
  ICB_STATUS_PARSE_ERROR = 3,
  // Arguments were structurally invalid (wrong arity, unknown name, ...).
  ICB_STATUS_INVALID_ARGUMENT = 4,
  // The requested computation is infeasible or uncertified.
  ICB_STATUS_INFEASIBLE = 5,
  // Instance exceeds the exhaustive-enumeration guards.
  ICB_STATUS_TOO_LARGE = 6,
} IcbStatus;

// An owned, validated joint distribution.
typedef struct IcbPmf IcbPmf;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent error on this thread.  The pointer stays
// valid until the next failing call on the same thread.
const char *icb_last_error_message(void);

// Parse and validate a distribution in the pmf file format.  On success
// `*out` owns the handle; release it with `icb_pmf_free`.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum IcbStatus icb_pmf_parse(const char *text, struct IcbPmf **out);

// Release a pmf handle.  Null is accepted.
//
// # Safety
// `handle` must have come from `icb_pmf_parse` and not been freed before.
void icb_pmf_free(struct IcbPmf *handle);

// Entropy (bits) of the marginal on the space-separated variable names.
//
// # Safety
// Pointer arguments as in `icb_pmf_parse`.
enum IcbStatus icb_pmf_entropy(const struct IcbPmf *handle, const char *variables, double *out);

// Mutual information I(a; b) in bits between two space-separated variable
// groups.
//
// # Safety
// Pointer arguments as in `icb_pmf_parse`.
enum IcbStatus icb_pmf_mutual_information(const struct IcbPmf *handle,
                                          const char *group_a,
                                          const char *group_b,
                                          double *out);

// Number of maximal-biclique classes of a bivariate pmf.
//
// # Safety
// Pointer arguments as in `icb_pmf_parse`.
enum IcbStatus icb_biclique_count(const struct IcbPmf *handle, uintptr_t *out);

// Gács–Körner common information and tension of a bivariate pmf.
//
// # Safety
// Pointer arguments as in `icb_pmf_parse`.
enum IcbStatus icb_gk_common_information(const struct IcbPmf *handle, double *ci, double *tension);

// Certified upper bound on sup H(U|Q) + H(V|Q) by the per-edge relaxation.
//
// # Safety
// Pointer arguments as in `icb_pmf_parse`.
enum IcbStatus icb_sup_relax(const struct IcbPmf *handle, double *out);

// Feasible achieved value of the sup by the seeded penalty search, with the
// witness residuals.
//
// # Safety
// Pointer arguments as in `icb_pmf_parse`.
enum IcbStatus icb_sup_search(const struct IcbPmf *handle,
                              uint64_t seed,
                              uint32_t restarts,
                              double *value,
                              double *marginal_residual,
                              double *markov_residual);

// Brute-force oracle value for tiny instances.
//
// # Safety
// Pointer arguments as in `icb_pmf_parse`.
enum IcbStatus icb_sup_oracle(const struct IcbPmf *handle, uint64_t seed, double *out);

// Closed-form sup for uniform k-ary equality.
//
// # Safety
// `out` must be a valid pointer.
enum IcbStatus icb_eq_sup_closed_form(uint64_t k, double *out);

// Closed-form information-complexity lower bound for uniform k-ary
// equality.
//
// # Safety
// `out` must be a valid pointer.
enum IcbStatus icb_eq_ic_lower_bound(uint64_t k, double *out);

// Exact information cost of a built-in protocol
// (`ternary_eq` or `two_bit_eq_randomized`) on its canonical instance.
//
// # Safety
// Pointer arguments as in `icb_pmf_parse`.
enum IcbStatus icb_protocol_cost(const char *name, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ICBOUND_H */
