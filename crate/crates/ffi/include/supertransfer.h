#ifndef SUPERTRANSFER_H
#define SUPERTRANSFER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum StStatus {
  ST_STATUS_OK = 0,
  ST_STATUS_NULL_POINTER = 1,
  ST_STATUS_INVALID_UTF8 = 2,
  ST_STATUS_CONFIG = 3,
  ST_STATUS_DOMAIN = 4,
  ST_STATUS_CAPACITY = 5,
  ST_STATUS_DIMENSION_MISMATCH = 6,
  ST_STATUS_CONVERGENCE = 7,
  ST_STATUS_REGIME = 8,
  ST_STATUS_DEGENERATE = 9,
  ST_STATUS_INVALID_RUN = 10,
  ST_STATUS_IO = 11,
  ST_STATUS_JSON = 12,
  ST_STATUS_PANIC = 13,
} StStatus;

// A sparse complex operator.
typedef struct StOperator StOperator;

// A validated model description.
typedef struct StSystem StSystem;

// Random-walk parameters. Times in ps, rates in 1/ps, lengths in nm.
typedef struct StDiffusionConfig {
  double alpha;
  double gamma;
  double tau;
  double lifetime;
  // Nonzero: every walker lives exactly `lifetime`; zero: exponential lifetimes.
  uint8_t fixed_lifetime;
  // 1 or 2.
  uint8_t lattice_dim;
  double complex_diameter;
  double target_l;
  size_t walkers;
  uint64_t rng_seed;
} StDiffusionConfig;

// Random-walk statistics. Standard errors are NaN for a single walker.
typedef struct StDiffusionResult {
  double step_length_ell;
  double required_step_length;
  double rms_displacement_units;
  double rms_standard_error;
  double rms_displacement_nm;
  double incoherent_hops_mean;
  double incoherent_hops_standard_error;
  uint8_t condition_met;
  double walkers_reaching_target;
  size_t walkers;
} StDiffusionResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread, or null if none.
//
// The pointer stays valid until the next failing call on this thread or
// [`st_clear_error`].
const char *st_last_error_message(void);

void st_clear_error(void);

// Library version as a static NUL-terminated string.
const char *st_version(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void st_string_free(char *s);

// Parse and validate a model description given as JSON.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum StStatus st_system_from_json(const char *json, struct StSystem **out);

// # Safety
// `sys` must be null or a handle from [`st_system_from_json`] not yet freed.
void st_system_free(struct StSystem *sys);

// Hilbert-space dimension of the system.
//
// # Safety
// `sys` must be a live handle; `out` must be writable.
enum StStatus st_system_dim(const struct StSystem *sys, size_t *out);

// Build the full Hamiltonian of a two-group system.
//
// # Safety
// `sys` must be a live handle; `out` must be writable.
enum StStatus st_system_hamiltonian(const struct StSystem *sys, struct StOperator **out);

// # Safety
// `op` must be null or a live operator handle.
void st_operator_free(struct StOperator *op);

// # Safety
// `op` must be a live handle; `out` must be writable.
enum StStatus st_operator_dim(const struct StOperator *op, size_t *out);

// Number of stored nonzero entries.
//
// # Safety
// `op` must be a live handle; `out` must be writable.
enum StStatus st_operator_nnz(const struct StOperator *op, size_t *out);

// Serialize the operator as JSON triplets; free the result with [`st_string_free`].
//
// # Safety
// `op` must be a live handle; `out` must be writable.
enum StStatus st_operator_to_json(const struct StOperator *op, char **out);

// Dicke emission amplitude `sqrt(n(N-n+1)(m_from+1)) γ`.
//
// # Safety
// `out` must be writable.
enum StStatus st_emission_amplitude(size_t sites,
                                    size_t n,
                                    double gamma,
                                    size_t m_from,
                                    double *out);

// Forward hopping rate from `|n>_A|m>_B` to `|n-1>_A|m+1>_B`.
//
// # Safety
// `out` must be writable.
enum StStatus st_supertransfer_forward(size_t n,
                                       size_t sites_a,
                                       size_t m,
                                       size_t sites_b,
                                       double gamma,
                                       double *out);

// Net A→B transfer rate.
//
// # Safety
// `out` must be writable.
enum StStatus st_supertransfer_rate(size_t n,
                                    size_t sites_a,
                                    size_t m,
                                    size_t sites_b,
                                    double gamma,
                                    double *out);

// `ℓ = α γ τ`.
//
// # Safety
// `out` must be writable.
enum StStatus st_effective_step_length(double alpha, double gamma, double tau, double *out);

// `L / sqrt(γ T)`.
//
// # Safety
// `out` must be writable.
enum StStatus st_required_step_length(double target_l, double gamma, double lifetime, double *out);

// Fill `out` with the default walk parameters.
//
// # Safety
// `out` must be writable.
enum StStatus st_diffusion_default_config(struct StDiffusionConfig *out);

// Monte Carlo random walk; deterministic for a given `rng_seed`.
//
// # Safety
// `config` must be readable and `out` writable.
enum StStatus st_simulate_walk(const struct StDiffusionConfig *config,
                               struct StDiffusionResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPERTRANSFER_H */
