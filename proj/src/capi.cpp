#include "swingmc.h"

#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include "experiment.hpp"
#include "oracle.hpp"

struct swingmc_config {
    swingmc::ExperimentConfig cfg;
};

namespace {

void copy_error(char* err, size_t err_len, const char* message) {
    if (!err || err_len == 0) return;
    std::strncpy(err, message, err_len - 1);
    err[err_len - 1] = '\0';
}

swingmc_result to_c_result(const swingmc::ResultRow& row) {
    swingmc_result out;
    out.delta = row.delta;
    out.rights = row.rights;
    out.lower = row.lower;
    out.upper = row.upper;
    out.ci_low = row.ci_low;
    out.ci_high = row.ci_high;
    out.std_lower = row.std_lower;
    out.std_upper = row.std_upper;
    out.seconds = row.seconds;
    return out;
}

template <typename Fn>
swingmc_status guarded(char* err, size_t err_len, Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        copy_error(err, err_len, e.what());
        return SWINGMC_EINVAL;
    } catch (const std::exception& e) {
        copy_error(err, err_len, e.what());
        return SWINGMC_ERUNTIME;
    } catch (...) {
        copy_error(err, err_len, "unknown error");
        return SWINGMC_ERUNTIME;
    }
}

}  // namespace

extern "C" {

swingmc_config* swingmc_config_create(void) { return new (std::nothrow) swingmc_config; }

void swingmc_config_free(swingmc_config* config) { delete config; }

swingmc_status swingmc_config_set(swingmc_config* config, const char* key,
                                  const char* value, char* err, size_t err_len) {
    if (!config || !key || !value) {
        copy_error(err, err_len, "null argument");
        return SWINGMC_EINVAL;
    }
    return guarded(err, err_len, [&] {
        swingmc::set_config_value(config->cfg, key, value);
        return SWINGMC_OK;
    });
}

swingmc_status swingmc_config_load_file(swingmc_config* config, const char* path,
                                        char* err, size_t err_len) {
    if (!config || !path) {
        copy_error(err, err_len, "null argument");
        return SWINGMC_EINVAL;
    }
    return guarded(err, err_len, [&] {
        swingmc::load_config_file(config->cfg, path);
        return SWINGMC_OK;
    });
}

swingmc_status swingmc_run_experiment(const swingmc_config* config, swingmc_result* out,
                                      char* err, size_t err_len) {
    if (!config || !out) {
        copy_error(err, err_len, "null argument");
        return SWINGMC_EINVAL;
    }
    return guarded(err, err_len, [&] {
        *out = to_c_result(swingmc::run_experiment(config->cfg));
        return SWINGMC_OK;
    });
}

swingmc_status swingmc_run_table(const swingmc_config* config, const char* csv_path,
                                 swingmc_row_callback on_row, void* user, char* err,
                                 size_t err_len) {
    if (!config) {
        copy_error(err, err_len, "null argument");
        return SWINGMC_EINVAL;
    }
    return guarded(err, err_len, [&] {
        swingmc::ExperimentConfig cfg = config->cfg;
        if (csv_path) cfg.out = csv_path;
        swingmc::run_table(cfg, [&](int, int, const swingmc::ResultRow* row,
                                    const std::string* error) {
            if (!on_row) return;
            if (row) {
                const swingmc_result r = to_c_result(*row);
                on_row(&r, nullptr, user);
            } else {
                on_row(nullptr, error ? error->c_str() : "unknown error", user);
            }
        });
        return SWINGMC_OK;
    });
}

swingmc_status swingmc_oracle_check(unsigned long long seed, int instances,
                                    swingmc_oracle_report* out, char* err,
                                    size_t err_len) {
    if (!out || instances < 1) {
        copy_error(err, err_len, "bad arguments");
        return SWINGMC_EINVAL;
    }
    return guarded(err, err_len, [&] {
        const auto report = swingmc::oracle::run_oracle_suite(seed, instances);
        out->instances = report.instances;
        out->max_value_dev = report.max_value_dev;
        out->max_theta_dev = report.max_theta_dev;
        out->max_gap_bound = report.max_gap_bound;
        out->max_recursion_dev = report.max_recursion_dev;
        return SWINGMC_OK;
    });
}

const char* swingmc_version(void) { return "1.0.0"; }

}  // extern "C"
