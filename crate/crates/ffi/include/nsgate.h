#ifndef NSGATE_H
#define NSGATE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum NsgStatus {
  NSG_STATUS_OK = 0,
  NSG_STATUS_NULL_POINTER = 1,
  NSG_STATUS_INVALID_ARGUMENT = 2,
  NSG_STATUS_PARSE_ERROR = 3,
  NSG_STATUS_INVALID_CIRCUIT = 4,
  // The herald pattern cannot occur for this input.
  NSG_STATUS_NOT_HERALDED = 5,
  NSG_STATUS_INVALID_UTF8 = 6,
  NSG_STATUS_INTERNAL = 7,
} NsgStatus;

// Built-in gate wirings.
typedef enum NsgGate {
  NSG_GATE_KLM = 0,
  NSG_GATE_REVERSE = 1,
} NsgGate;

// Opaque circuit handle.
typedef struct NsgCircuit NsgCircuit;

typedef struct NsgComplex {
  double re;
  double im;
} NsgComplex;

// Monte Carlo fidelity estimate.
typedef struct NsgFidelity {
  double mean;
  double std_error;
  uintptr_t n_samples;
  uintptr_t n_excluded;
  double mean_success_prob;
} NsgFidelity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *nsg_version(void);

// Message for the last failed call on this thread, or NULL. Valid until the
// next call into the library from the same thread.
const char *nsg_last_error_message(void);

// Creates a handle for one of the built-in gates.
//
// # Safety
// `out` must be a valid pointer to write the handle to.
enum NsgStatus nsg_circuit_builtin(enum NsgGate gate, struct NsgCircuit **out);

// Parses a circuit from its plain-text description.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum NsgStatus nsg_circuit_parse(const char *text, struct NsgCircuit **out);

// Releases a handle. NULL is ignored.
//
// # Safety
// `circuit` must come from this library and not have been freed.
void nsg_circuit_free(struct NsgCircuit *circuit);

// Number of deviation entries the circuit expects.
//
// # Safety
// Both pointers must be valid.
enum NsgStatus nsg_circuit_parameter_count(const struct NsgCircuit *circuit, uintptr_t *out);

// Plain-text description of the circuit; free with `nsg_string_free`.
//
// # Safety
// Both pointers must be valid.
enum NsgStatus nsg_circuit_to_text(const struct NsgCircuit *circuit, char **out);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void nsg_string_free(char *s);

// Runs the circuit on signal `(c0, c1, c2)` and post-selects on the herald.
// Writes the normalized output and the heralding probability. Returns
// `NSG_STATUS_NOT_HERALDED` (with `probability` still written) when the
// herald cannot fire.
//
// # Safety
// `deviations` must hold `n_deviations` values; `signal` and `output` must
// point to three elements each; `probability` must be valid.
enum NsgStatus nsg_circuit_apply(const struct NsgCircuit *circuit,
                                 const double *deviations,
                                 uintptr_t n_deviations,
                                 const struct NsgComplex *signal,
                                 struct NsgComplex *output,
                                 double *probability);

// Average gate fidelity over `n_samples` Haar-random inputs.
// Deterministic in `seed`.
//
// # Safety
// `deviations` must hold `n_deviations` values; `out` must be valid.
enum NsgStatus nsg_circuit_fidelity_mc(const struct NsgCircuit *circuit,
                                       const double *deviations,
                                       uintptr_t n_deviations,
                                       uintptr_t n_samples,
                                       uint64_t seed,
                                       struct NsgFidelity *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSGATE_H */
