/*
 * swingmc - Monte Carlo pricing of multiple-exercise (swing) options with
 * volume constraints and refraction periods: low-biased policy estimates,
 * high-biased dual estimates and 95% confidence intervals.
 *
 * C interface of the shared library. All functions are thread-compatible:
 * distinct config handles may be used from distinct threads.
 */
#ifndef SWINGMC_H
#define SWINGMC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum swingmc_status {
    SWINGMC_OK = 0,
    SWINGMC_EINVAL = 1,  /* bad arguments or configuration */
    SWINGMC_ERUNTIME = 2 /* I/O or internal failure */
} swingmc_status;

/* Opaque experiment configuration. */
typedef struct swingmc_config swingmc_config;

swingmc_config* swingmc_config_create(void);
void swingmc_config_free(swingmc_config* config);

/*
 * Sets one configuration key. Keys mirror the CLI flags:
 *   sigma, meanrev, mu, s0, horizon          model parameters
 *   preset (swing|exputil|liquidation)       contract family
 *   volume (unit|offpeak), strike, alpha, impact_a, impact_b
 *   delta, rights                            comma-separated grid lists
 *   n1, n2, n3, n4, seed, threads            simulation sizes and seeding
 *   out, timing_in_csv, table_out, table_in, dual_dump
 * On error, a message is copied into err (if non-NULL, err_len > 0).
 */
swingmc_status swingmc_config_set(swingmc_config* config, const char* key,
                                  const char* value, char* err, size_t err_len);

/* Loads "key = value" lines ('#' comments) from a file. */
swingmc_status swingmc_config_load_file(swingmc_config* config, const char* path,
                                        char* err, size_t err_len);

typedef struct swingmc_result {
    int delta;
    int rights;
    double lower;     /* low-biased price estimate */
    double upper;     /* high-biased dual estimate */
    double ci_low;    /* lower - 1.96 * std_lower */
    double ci_high;   /* upper + 1.96 * std_upper */
    double std_lower; /* standard deviation of the lower estimate */
    double std_upper; /* standard deviation of the upper estimate */
    double seconds;   /* wall time of the cell */
} swingmc_result;

/* Prices the first (delta, rights) cell of the configured grid. */
swingmc_status swingmc_run_experiment(const swingmc_config* config,
                                      swingmc_result* out, char* err, size_t err_len);

/*
 * Observes grid cells as they complete; `error` is NULL on success and
 * `row` is NULL for a failed cell.
 */
typedef void (*swingmc_row_callback)(const swingmc_result* row, const char* error,
                                     void* user);

/*
 * Runs the whole delta x rights grid. Writes a CSV to csv_path when non-NULL
 * (header delta,L,lower,upper,ci_low,ci_high,std_lower,std_upper,seconds).
 * Failed cells are reported through the callback and skipped; remaining
 * cells still run.
 */
swingmc_status swingmc_run_table(const swingmc_config* config, const char* csv_path,
                                 swingmc_row_callback on_row, void* user, char* err,
                                 size_t err_len);

typedef struct swingmc_oracle_report {
    int instances;
    double max_value_dev;     /* exact DP vs independent enumeration */
    double max_theta_dev;     /* recursive dual vs exact value, exact inputs */
    double max_gap_bound;     /* envelope bounds at the exact envelopes */
    double max_recursion_dev; /* recursion vs brute force, random inputs */
} swingmc_oracle_report;

/*
 * Cross-validates the solvers on `instances` random small instances (all
 * three presets, random volume caps and refraction periods). All reported
 * deviations should be below 1e-10.
 */
swingmc_status swingmc_oracle_check(unsigned long long seed, int instances,
                                    swingmc_oracle_report* out, char* err,
                                    size_t err_len);

const char* swingmc_version(void);

#ifdef __cplusplus
}
#endif

#endif /* SWINGMC_H */
