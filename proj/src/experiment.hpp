#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "contract.hpp"
#include "dual.hpp"
#include "model.hpp"
#include "primal.hpp"
#include "regress.hpp"

namespace swingmc {

// Everything one pricing run needs: model and contract parameters, the
// simulation sizes of the four stages (regression paths, policy paths, outer
// dual paths, inner paths per node), seeding and output knobs.
struct ExperimentConfig {
    double sigma = 0.5;
    double meanrev = 0.9;
    double mu = 0.0;
    double s0 = 1.0;
    int horizon = 50;

    std::string preset = "swing";  // swing | exputil | liquidation
    std::string volume = "unit";   // unit | offpeak
    double strike = 1.0;
    double alpha = 1.0;      // exputil risk aversion
    double impact_a = 0.01;  // liquidation resilience slope
    double impact_b = 0.1;   // liquidation impact scale
    std::vector<int> deltas = {1};
    std::vector<int> rights = {2};

    std::int64_t n1 = 0;  // 0 = profile default: 1000 unit, 10000 offpeak
    std::int64_t n2 = 300000;
    int n3 = 2000;
    int n4 = 100;
    std::uint64_t seed = 20240901;
    int threads = 0;  // 0 = hardware concurrency

    std::string out;            // CSV path for run_table ("" = no file)
    bool timing_in_csv = true;  // false writes 0 in the seconds column
    std::string table_out;      // save the fitted continuation table
    std::string table_in;       // reuse a previously saved table
    std::string dual_dump;      // prefix for theta/snell diagnostic CSVs

    void validate() const;
    std::int64_t effective_n1() const;
    MarketModel model() const;
    ContractSpec contract(int delta, int n_rights) const;
};

struct ResultRow {
    int delta = 0;
    int rights = 0;
    double lower = 0.0;
    double upper = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double std_lower = 0.0;
    double std_upper = 0.0;
    double seconds = 0.0;
};

// One full pricing pass (continuation fit, policy paths, nested dual,
// interval) for the given (delta, rights) cell, with stage seeds derived
// independently from the master seed.
ResultRow run_experiment_cell(const ExperimentConfig& config, int delta, int n_rights);

// Same, for the first cell of the configured grid.
ResultRow run_experiment(const ExperimentConfig& config);

// Observes each grid cell as it completes; `error` is null on success.
using RowCallback =
    std::function<void(int delta, int n_rights, const ResultRow*, const std::string* error)>;

// Runs the full deltas x rights grid. A failed cell is reported through the
// callback and skipped; remaining cells still run. Writes config.out when
// set, using 6 significant digits and '.' decimals.
std::vector<ResultRow> run_table(const ExperimentConfig& config,
                                 const RowCallback& on_row = {});

std::string format_csv(const std::vector<ResultRow>& rows, bool timing_in_csv);

// Flat key=value assignment mirroring the CLI flags; throws on unknown keys
// or unparsable values, naming the offender.
void set_config_value(ExperimentConfig& config, const std::string& key,
                      const std::string& value);

// key = value lines, '#' comments, blank lines ignored.
void load_config_file(ExperimentConfig& config, const std::string& path);

}  // namespace swingmc
