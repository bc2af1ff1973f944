// Command-line front end; talks to the engine exclusively through the C API.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "swingmc.h"

namespace {

struct ConfigHandle {
    swingmc_config* ptr;
    ConfigHandle() : ptr(swingmc_config_create()) {}
    ~ConfigHandle() { swingmc_config_free(ptr); }
};

int fail(const char* what, const char* detail) {
    std::fprintf(stderr, "swingmc: %s: %s\n", what, detail);
    return 1;
}

void print_row(const swingmc_result& r) {
    std::printf("delta=%-3d L=%-3d lower=%-10.6g upper=%-10.6g CI=[%.6g, %.6g] "
                "std=(%.3g, %.3g) %.2fs\n",
                r.delta, r.rights, r.lower, r.upper, r.ci_low, r.ci_high, r.std_lower,
                r.std_upper, r.seconds);
}

void row_callback(const swingmc_result* row, const char* error, void*) {
    if (row) {
        print_row(*row);
    } else {
        std::fprintf(stderr, "swingmc: cell failed: %s\n", error);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Primal-dual Monte Carlo pricer for multiple-exercise options"};

    std::string config_file, preset, volume, out, table_out, table_in, dual_dump;
    std::string delta_list, rights_list;
    double sigma = 0, meanrev = 0, mu = 0, s0 = 0, strike = 0, alpha = 0;
    double impact_a = 0, impact_b = 0;
    long long n1 = 0, n2 = 0, n3 = 0, n4 = 0, seed = 0, horizon = 0, threads = 0;
    bool no_timing = false, oracle_check = false;
    long long oracle_instances = 200;

    app.add_option("--config", config_file, "key = value configuration file");
    auto* opt_preset = app.add_option("--preset", preset, "swing|exputil|liquidation");
    auto* opt_volume = app.add_option("--volume", volume, "unit|offpeak");
    auto* opt_delta = app.add_option("--delta", delta_list, "refraction period(s), comma separated");
    auto* opt_rights = app.add_option("--rights", rights_list, "exercise right count(s), comma separated");
    auto* opt_n1 = app.add_option("--n1", n1, "regression paths");
    auto* opt_n2 = app.add_option("--n2", n2, "lower-bound paths");
    auto* opt_n3 = app.add_option("--n3", n3, "outer dual paths");
    auto* opt_n4 = app.add_option("--n4", n4, "inner paths per (path, date)");
    auto* opt_seed = app.add_option("--seed", seed, "master seed");
    auto* opt_out = app.add_option("--out", out, "CSV output path");
    auto* opt_sigma = app.add_option("--sigma", sigma, "volatility per step");
    auto* opt_meanrev = app.add_option("--meanrev", meanrev, "mean reversion per step");
    auto* opt_mu = app.add_option("--mu", mu, "long-run log level");
    auto* opt_s0 = app.add_option("--s0", s0, "initial price");
    auto* opt_strike = app.add_option("--strike", strike, "strike");
    auto* opt_horizon = app.add_option("--horizon", horizon, "last exercise date");
    auto* opt_alpha = app.add_option("--alpha", alpha, "exputil risk aversion");
    auto* opt_ia = app.add_option("--impact-a", impact_a, "liquidation resilience slope");
    auto* opt_ib = app.add_option("--impact-b", impact_b, "liquidation impact scale");
    auto* opt_threads = app.add_option("--threads", threads, "worker threads (0 = auto)");
    auto* opt_table_out = app.add_option("--table-out", table_out, "save fitted continuation table");
    auto* opt_table_in = app.add_option("--table-in", table_in, "reuse saved continuation table");
    auto* opt_dump = app.add_option("--dual-dump", dual_dump, "prefix for theta/snell diagnostics");
    app.add_flag("--no-timing", no_timing, "write 0 in the CSV seconds column");
    app.add_flag("--oracle-check", oracle_check, "run the exact-solver cross-validation suite");
    app.add_option("--oracle-instances", oracle_instances, "instances for --oracle-check");

    CLI11_PARSE(app, argc, argv);

    char err[512] = {0};
    if (oracle_check) {
        swingmc_oracle_report report;
        const unsigned long long oseed = opt_seed->count() ? seed : 20240901ull;
        if (swingmc_oracle_check(oseed, static_cast<int>(oracle_instances), &report, err,
                                 sizeof(err)) != SWINGMC_OK)
            return fail("oracle check", err);
        std::printf("oracle suite over %d random instances:\n", report.instances);
        std::printf("  max |dynamic program - enumeration|   = %.3g\n", report.max_value_dev);
        std::printf("  max |recursive dual - exact value|    = %.3g\n", report.max_theta_dev);
        std::printf("  max envelope gap bound at exact input = %.3g\n", report.max_gap_bound);
        std::printf("  max |recursion - brute-force maximum| = %.3g\n", report.max_recursion_dev);
        const bool ok = report.max_value_dev < 1e-12 && report.max_theta_dev < 1e-10 &&
                        report.max_gap_bound < 1e-10 && report.max_recursion_dev < 1e-10;
        std::printf("%s\n", ok ? "PASS" : "FAIL");
        return ok ? 0 : 1;
    }

    ConfigHandle config;
    if (!config.ptr) return fail("config", "out of memory");
    auto set = [&](const char* key, const std::string& value) -> bool {
        if (swingmc_config_set(config.ptr, key, value.c_str(), err, sizeof(err)) !=
            SWINGMC_OK) {
            fail(key, err);
            return false;
        }
        return true;
    };
    auto set_num = [&](const char* key, double v) { return set(key, std::to_string(v)); };
    auto set_int = [&](const char* key, long long v) { return set(key, std::to_string(v)); };

    if (!config_file.empty() &&
        swingmc_config_load_file(config.ptr, config_file.c_str(), err, sizeof(err)) !=
            SWINGMC_OK)
        return fail("config file", err);

    if (opt_preset->count() && !set("preset", preset)) return 1;
    if (opt_volume->count() && !set("volume", volume)) return 1;
    if (opt_delta->count() && !set("delta", delta_list)) return 1;
    if (opt_rights->count() && !set("rights", rights_list)) return 1;
    if (opt_n1->count() && !set_int("n1", n1)) return 1;
    if (opt_n2->count() && !set_int("n2", n2)) return 1;
    if (opt_n3->count() && !set_int("n3", n3)) return 1;
    if (opt_n4->count() && !set_int("n4", n4)) return 1;
    if (opt_seed->count() && !set_int("seed", seed)) return 1;
    if (opt_out->count() && !set("out", out)) return 1;
    if (opt_sigma->count() && !set_num("sigma", sigma)) return 1;
    if (opt_meanrev->count() && !set_num("meanrev", meanrev)) return 1;
    if (opt_mu->count() && !set_num("mu", mu)) return 1;
    if (opt_s0->count() && !set_num("s0", s0)) return 1;
    if (opt_strike->count() && !set_num("strike", strike)) return 1;
    if (opt_horizon->count() && !set_int("horizon", horizon)) return 1;
    if (opt_alpha->count() && !set_num("alpha", alpha)) return 1;
    if (opt_ia->count() && !set_num("impact_a", impact_a)) return 1;
    if (opt_ib->count() && !set_num("impact_b", impact_b)) return 1;
    if (opt_threads->count() && !set_int("threads", threads)) return 1;
    if (opt_table_out->count() && !set("table_out", table_out)) return 1;
    if (opt_table_in->count() && !set("table_in", table_in)) return 1;
    if (opt_dump->count() && !set("dual_dump", dual_dump)) return 1;
    if (no_timing && !set("timing_in_csv", "0")) return 1;

    if (swingmc_run_table(config.ptr, opt_out->count() ? out.c_str() : nullptr,
                          row_callback, nullptr, err, sizeof(err)) != SWINGMC_OK)
        return fail("run", err);
    return 0;
}
