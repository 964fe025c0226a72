/* Generated by cbindgen from crates/ffi/src/lib.rs. */

#ifndef PHONON_QFT_H
#define PHONON_QFT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PqStatus {
  PQ_STATUS_OK = 0,
  PQ_STATUS_NULL_POINTER = 1,
  PQ_STATUS_INVALID_UTF8 = 2,
  PQ_STATUS_CONFIG = 3,
  PQ_STATUS_INVALID_ARGUMENT = 4,
  PQ_STATUS_SOLVER = 5,
  PQ_STATUS_IO = 6,
  PQ_STATUS_PANIC = 7,
} PqStatus;

/**
 * Compiled Trotter circuit.
 */
typedef struct PqCircuit PqCircuit;

/**
 * Parsed run configuration.
 */
typedef struct PqConfig PqConfig;

/**
 * State vector on a spin-phonon register.
 */
typedef struct PqState PqState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty if none. Valid until the next failing call.
 */
const char *pq_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pq_version(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pq_string_free(char *s);

/**
 * Parses `key = value` configuration text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PqStatus pq_config_parse(const char *text, struct PqConfig **out);

/**
 * # Safety
 * `cfg` must come from [`pq_config_parse`] and not have been freed. Null is ignored.
 */
void pq_config_free(struct PqConfig *cfg);

/**
 * Canonical text form of a configuration.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
 */
enum PqStatus pq_config_to_text(const struct PqConfig *cfg, char **out);

/**
 * Number of lattice sites.
 *
 * # Safety
 * `cfg` must be a live handle or null.
 */
uintptr_t pq_config_n_sites(const struct PqConfig *cfg);

/**
 * Writes every artifact of the configured run into its output directory.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum PqStatus pq_run(const struct PqConfig *cfg);

/**
 * Trajectory CSV from the exact solver (`exact != 0`) or the Trotter circuit.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
 */
enum PqStatus pq_trajectory_csv(const struct PqConfig *cfg, int32_t exact, char **out);

/**
 * Gate-angle table as CSV.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
 */
enum PqStatus pq_angles_csv(const struct PqConfig *cfg, char **out);

/**
 * Entangling-gate counts as CSV.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
 */
enum PqStatus pq_cost_csv(const struct PqConfig *cfg, char **out);

/**
 * Trap parameter sheet as CSV; fails with [`PqStatus::Config`] when the config has no trap keys.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
 */
enum PqStatus pq_hardware_csv(const struct PqConfig *cfg, char **out);

/**
 * Compiles one Trotter step of the configured model.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum PqStatus pq_circuit_new(const struct PqConfig *cfg, struct PqCircuit **out);

/**
 * # Safety
 * `circuit` must come from [`pq_circuit_new`] and not have been freed. Null is ignored.
 */
void pq_circuit_free(struct PqCircuit *circuit);

/**
 * Number of Trotter steps covering the configured total time.
 *
 * # Safety
 * `circuit` must be a live handle or null.
 */
uintptr_t pq_circuit_n_steps(const struct PqCircuit *circuit);

/**
 * Gates in one step.
 *
 * # Safety
 * `circuit` must be a live handle or null.
 */
uintptr_t pq_circuit_n_gates(const struct PqCircuit *circuit);

/**
 * One step as gate lines.
 *
 * # Safety
 * `circuit` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
 */
enum PqStatus pq_circuit_dump(const struct PqCircuit *circuit,
                              char **out);

/**
 * Applies `n_steps` Trotter steps to `state` in place.
 *
 * # Safety
 * `circuit` and `state` must be live handles.
 */
enum PqStatus pq_circuit_apply(const struct PqCircuit *circuit,
                               struct PqState *state,
                               uintptr_t n_steps);

/**
 * The configured model's initial state.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum PqStatus pq_state_initial(const struct PqConfig *cfg, struct PqState **out);

/**
 * Independent copy of a state.
 *
 * # Safety
 * `state` must be a live handle and `out` a valid pointer.
 */
enum PqStatus pq_state_clone(const struct PqState *state, struct PqState **out);

/**
 * # Safety
 * `state` must come from this library and not have been freed. Null is ignored.
 */
void pq_state_free(struct PqState *state);

/**
 * Register dimension.
 *
 * # Safety
 * `state` must be a live handle or null.
 */
uintptr_t pq_state_dim(const struct PqState *state);

/**
 * Copies amplitudes as interleaved `(re, im)` pairs into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `state` must be a live handle and `buf` valid for `len` writes.
 */
enum PqStatus pq_state_amplitudes(const struct PqState *state, double *buf, uintptr_t len);

/**
 * Euclidean norm.
 *
 * # Safety
 * `state` must be a live handle and `out` a valid pointer.
 */
enum PqStatus pq_state_norm(const struct PqState *state, double *out);

/**
 * Loschmidt echo `|<reference|state>|^2`.
 *
 * # Safety
 * Both states must be live handles and `out` a valid pointer.
 */
enum PqStatus pq_state_echo(const struct PqState *reference,
                            const struct PqState *state,
                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHONON_QFT_H */
