/* C interface to the imflux induction-motor observer simulation. */

#pragma once

/* Generated by cbindgen from the imflux-ffi crate; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum ImfluxStatus {
  /**
   * Success.
   */
  IMFLUX_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  IMFLUX_STATUS_NULL_ARG = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  IMFLUX_STATUS_UTF8 = 2,
  /**
   * The configuration is invalid (unknown key, unparsable value, or a
   * value rejected by validation).
   */
  IMFLUX_STATUS_CONFIG = 3,
  /**
   * A file could not be read or written.
   */
  IMFLUX_STATUS_IO = 4,
  /**
   * The simulation hit a non-finite value and stopped early; the summary
   * is still filled with the state at the fault.
   */
  IMFLUX_STATUS_FAULT = 5,
  /**
   * Unexpected internal failure (a caught panic).
   */
  IMFLUX_STATUS_INTERNAL = 6,
} ImfluxStatus;

/**
 * Opaque scenario handle. Create with `imflux_scenario_default` or
 * `imflux_scenario_from_file`, release with `imflux_scenario_free`.
 */
typedef struct ImfluxScenario ImfluxScenario;

/**
 * Flat end-of-run summary filled by `imflux_run`.
 */
typedef struct ImfluxSummary {
  /**
   * Number of integration steps executed.
   */
  uint64_t steps;
  /**
   * Number of telemetry records produced (decimated step boundaries).
   */
  uint64_t records;
  /**
   * Wall-clock seconds spent integrating.
   */
  double wall_seconds;
  /**
   * |flux estimate - true flux| at the end of the run (Wb).
   */
  double final_flux_err_norm;
  /**
   * Final rotor-resistance estimate (ohm).
   */
  double final_rr_hat;
  /**
   * Final relative rotor-resistance error.
   */
  double final_rr_err_rel;
  /**
   * Final load-torque estimate (N m).
   */
  double final_tl_hat;
  /**
   * Final absolute load-torque error (N m).
   */
  double final_tl_err;
  /**
   * Final rotor-speed estimate (rad/s).
   */
  double final_omega_hat;
  /**
   * Final absolute rotor-speed error (rad/s).
   */
  double final_omega_err;
  /**
   * Excitation energy of the electrical mixing determinant.
   */
  double int_delta_e_sq;
  /**
   * Excitation energy of the mechanical mixing determinant.
   */
  double int_delta_m_sq;
  /**
   * 1 if the run stopped on a non-finite value, else 0.
   */
  uint32_t faulted;
  /**
   * Time of the fault in seconds; meaningful only when `faulted` is 1.
   */
  double fault_time;
} ImfluxSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string; never free it.
 */
const char *imflux_version(void);

/**
 * Message for the most recent failure on the calling thread, or null if no
 * failure has occurred. The pointer stays valid until the next failing call
 * on the same thread; do not free it.
 */
const char *imflux_last_error(void);

/**
 * New scenario with the canonical default configuration. Never fails.
 */
struct ImfluxScenario *imflux_scenario_default(void);

/**
 * Load a scenario from a TOML file. On success stores the new handle in
 * `*out`.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum ImfluxStatus imflux_scenario_from_file(const char *path, struct ImfluxScenario **out);

/**
 * Override one configuration key on the scenario, e.g.
 * `imflux_scenario_set(s, "sim.duration", "2.5")`. Unknown keys and
 * unparsable values fail with `Config`; value validation (positivity,
 * ranges) happens in `imflux_run`.
 *
 * # Safety
 * `scenario` must be a live handle from this library; `key` and `value`
 * must be valid NUL-terminated strings.
 */
enum ImfluxStatus imflux_scenario_set(struct ImfluxScenario *scenario,
                                      const char *key,
                                      const char *value);

/**
 * Serialize the scenario to TOML. On success `*out` holds a heap string;
 * release it with `imflux_string_free`.
 *
 * # Safety
 * `scenario` must be a live handle from this library and `out` a valid
 * pointer.
 */
enum ImfluxStatus imflux_scenario_to_toml(const struct ImfluxScenario *scenario, char **out);

/**
 * Validate the scenario and simulate it. Fills `*out_summary`; when
 * `telemetry_path` is non-null, also writes the full telemetry CSV there.
 * Returns `Fault` if integration hit a non-finite value; the summary then
 * describes the partial run and the telemetry holds the records up to the
 * fault.
 *
 * # Safety
 * `scenario` must be a live handle from this library, `telemetry_path` null
 * or a valid NUL-terminated string, and `out_summary` a valid pointer.
 */
enum ImfluxStatus imflux_run(const struct ImfluxScenario *scenario,
                             const char *telemetry_path,
                             struct ImfluxSummary *out_summary);

/**
 * Release a scenario handle. Null is a no-op.
 *
 * # Safety
 * `scenario` must be null or a live handle from this library; it must not
 * be used afterwards.
 */
void imflux_scenario_free(struct ImfluxScenario *scenario);

/**
 * Release a string returned by this library (`imflux_scenario_to_toml`).
 * Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string produced by this library; it must not be
 * used afterwards.
 */
void imflux_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
