/* pcsim — rollout-allocation simulator for group-based RL post-training.
 *
 * C interface to the simulator core: opaque handles, integer status codes,
 * library-owned strings. Thread safety: a config or report handle may be
 * used from one thread at a time; distinct handles are independent. Error
 * messages are thread-local and valid until the next failing call on the
 * same thread.
 */
#ifndef PCSIM_H
#define PCSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcsim_status {
    PCSIM_OK = 0,
    PCSIM_ERROR_INVALID_ARGUMENT = 1,
    PCSIM_ERROR_CONFIG = 2,
    PCSIM_ERROR_IO = 3,
    PCSIM_ERROR_RUNTIME = 4
} pcsim_status;

typedef struct pcsim_config pcsim_config;
typedef struct pcsim_report pcsim_report;

const char* pcsim_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* pcsim_last_error(void);

/* --- configuration ----------------------------------------------------- */

pcsim_status pcsim_config_create_default(pcsim_config** out_config);
pcsim_status pcsim_config_load_file(const char* path, pcsim_config** out_config);
pcsim_status pcsim_config_load_json(const char* json_text, pcsim_config** out_config);
void pcsim_config_free(pcsim_config* config);

/* method: "grpo", "dapo", "pc", or "compare". */
pcsim_status pcsim_config_set_method(pcsim_config* config, const char* method);
pcsim_status pcsim_config_set_seeds(pcsim_config* config, const uint64_t* seeds,
                                    size_t count);
pcsim_status pcsim_config_set_max_steps(pcsim_config* config, int64_t max_steps);
pcsim_status pcsim_config_set_output_dir(pcsim_config* config, const char* path);

/* Canonical JSON for the configuration; owned by the handle and valid until
 * the next call on it or until the handle is freed. */
const char* pcsim_config_json(pcsim_config* config);

/* --- execution ---------------------------------------------------------- */

/* Runs the configured method (or the three-way comparison), writes metrics
 * files into the configured output directory, and returns a report. */
pcsim_status pcsim_run(const pcsim_config* config, pcsim_report** out_report);

/* Sweeps one scheduler parameter. axis: "n_pilot", "p_lower", "p_upper",
 * "p_solve", or "d". values: comma-separated numbers. mode: "direct",
 * "equal-training", or "equal-sampling" (split sweeps only). */
pcsim_status pcsim_sweep(const pcsim_config* config, const char* axis,
                         const char* values, const char* mode,
                         pcsim_report** out_report);

/* Human-readable result table. Owned by the report handle. */
const char* pcsim_report_text(const pcsim_report* report);

/* Summary as a JSON document. Owned by the report handle. */
const char* pcsim_report_json(const pcsim_report* report);

void pcsim_report_free(pcsim_report* report);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PCSIM_H */
