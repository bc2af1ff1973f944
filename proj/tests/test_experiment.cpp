#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "experiment.hpp"
#include "oracle.hpp"

using namespace swingmc;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.horizon = 10;
    cfg.deltas = {1};
    cfg.rights = {2};
    cfg.n1 = 200;
    cfg.n2 = 2000;
    cfg.n3 = 40;
    cfg.n4 = 10;
    cfg.seed = 4321;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config keys parse and unknown keys fail loudly") {
    ExperimentConfig cfg;
    set_config_value(cfg, "sigma", "0.25");
    set_config_value(cfg, "delta", "1,2,4");
    set_config_value(cfg, "rights", "3");
    set_config_value(cfg, "volume", "offpeak");
    CHECK(cfg.sigma == 0.25);
    CHECK(cfg.deltas == std::vector<int>{1, 2, 4});
    CHECK(cfg.rights == std::vector<int>{3});
    CHECK(cfg.effective_n1() == 10000);  // off-peak default
    set_config_value(cfg, "n1", "777");
    CHECK(cfg.effective_n1() == 777);

    CHECK_THROWS_WITH_AS(set_config_value(cfg, "playful", "1"),
                         "config: unknown key 'playful'", std::invalid_argument);
    CHECK_THROWS_AS(set_config_value(cfg, "sigma", "abc"), std::invalid_argument);
    cfg.preset = "bogus";
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("config files load with comments and overrides") {
    const std::string path = "test_config.cfg";
    {
        std::ofstream out(path);
        out << "# pricing setup\n"
            << "sigma = 0.4\n"
            << "delta = 2,3  # grid\n"
            << "rights=2\n"
            << "\n"
            << "seed = 99\n";
    }
    ExperimentConfig cfg;
    load_config_file(cfg, path);
    CHECK(cfg.sigma == 0.4);
    CHECK(cfg.deltas == std::vector<int>{2, 3});
    CHECK(cfg.seed == 99);
    std::remove(path.c_str());
    CHECK_THROWS(load_config_file(cfg, "missing.cfg"));
}

TEST_CASE("csv formatting uses six significant digits and a stable header") {
    ResultRow row;
    row.delta = 1;
    row.rights = 2;
    row.lower = 3.31160489;
    row.upper = 3.32110222;
    row.ci_low = 3.30738111;
    row.ci_high = 3.32229333;
    row.std_lower = 0.00215;
    row.std_upper = 0.000607;
    row.seconds = 12.5;
    const std::string csv = format_csv({row}, true);
    CHECK(csv ==
          "delta,L,lower,upper,ci_low,ci_high,std_lower,std_upper,seconds\n"
          "1,2,3.3116,3.3211,3.30738,3.32229,0.00215,0.000607,12.5\n");
    const std::string no_timing = format_csv({row}, false);
    CHECK(no_timing.find(",0\n") != std::string::npos);
}

TEST_CASE("a noise-free run prices exactly at the deterministic program") {
    ExperimentConfig cfg = tiny_config();
    cfg.sigma = 0.0;
    cfg.meanrev = 0.4;
    cfg.mu = std::log(1.4);
    cfg.s0 = 1.8;
    cfg.horizon = 6;
    cfg.n1 = 30;
    cfg.n2 = 100;
    cfg.n3 = 10;
    cfg.n4 = 5;
    const ResultRow row = run_experiment_cell(cfg, 2, 2);

    oracle::FiniteTree tree;
    tree.branching = 1;
    tree.horizon = cfg.horizon;
    std::vector<double> path(cfg.horizon + 2);
    fill_path(cfg.model(), 1, 0, path);
    tree.prices = path;
    tree.probs.assign(path.size(), 1.0);
    const double exact =
        oracle::exact_value(tree, cfg.contract(2, 2)).value(2, 0);
    CHECK(row.lower == doctest::Approx(exact).epsilon(1e-9));
    CHECK(row.upper == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("tables rerun bit-identically for any worker count and seed reuse") {
    ExperimentConfig cfg = tiny_config();
    cfg.deltas = {1, 2};
    cfg.rights = {1, 2};
    cfg.timing_in_csv = false;
    std::vector<std::string> outputs;
    for (int threads : {1, 4, 16}) {
        cfg.threads = threads;
        cfg.out = "test_table_" + std::to_string(threads) + ".csv";
        run_table(cfg);
        outputs.push_back(slurp(cfg.out));
        std::remove(cfg.out.c_str());
    }
    CHECK(outputs[1] == outputs[0]);
    CHECK(outputs[2] == outputs[0]);
    CHECK(outputs[0].find("delta,L,lower") == 0);
}

TEST_CASE("an empty grid produces a header-only csv") {
    ExperimentConfig cfg = tiny_config();
    cfg.deltas.clear();
    cfg.out = "test_empty.csv";
    run_table(cfg);
    CHECK(slurp(cfg.out) ==
          "delta,L,lower,upper,ci_low,ci_high,std_lower,std_upper,seconds\n");
    std::remove(cfg.out.c_str());
}

TEST_CASE("a failing cell is reported and the remaining cells still run") {
    ExperimentConfig cfg = tiny_config();
    cfg.rights = {1, 70};  // 70 rights exceeds the engine cap and must fail
    cfg.out = "test_partial.csv";
    int ok = 0, failed = 0;
    std::string message;
    const auto rows = run_table(cfg, [&](int, int n_rights, const ResultRow* row,
                                         const std::string* error) {
        if (row) ++ok;
        if (error) {
            ++failed;
            message = *error;
            CHECK(n_rights == 70);
        }
    });
    CHECK(ok == 1);
    CHECK(failed == 1);
    CHECK(rows.size() == 1);
    CHECK(message.find("rights") != std::string::npos);
    const std::string csv = slurp(cfg.out);
    CHECK(csv.find("\n1,1,") != std::string::npos);
    std::remove(cfg.out.c_str());
}

TEST_CASE("the other presets run through the whole pipeline") {
    ExperimentConfig cfg = tiny_config();
    cfg.preset = "liquidation";
    cfg.impact_a = 0.01;
    cfg.impact_b = 0.1;
    cfg.rights = {3};
    const ResultRow liq = run_experiment(cfg);
    CHECK(liq.lower > 0.0);
    CHECK(liq.lower <= liq.upper + 1.96 * (liq.std_lower + liq.std_upper));

    cfg.preset = "exputil";
    cfg.alpha = 1.0;
    cfg.rights = {2};
    const ResultRow utility = run_experiment(cfg);
    CHECK(utility.lower >= -1.0);  // every admissible chain pays at least -1
    CHECK(utility.lower <= utility.upper + 1.96 * (utility.std_lower + utility.std_upper));
}

TEST_CASE("different seeds move the estimates") {
    ExperimentConfig cfg = tiny_config();
    const ResultRow a = run_experiment(cfg);
    cfg.seed = 9999;
    const ResultRow b = run_experiment(cfg);
    CHECK(a.lower != b.lower);
    CHECK(a.ci_low <= a.lower);
    CHECK(a.upper <= a.ci_high);
}

TEST_CASE("off-peak pricing lands on the published value") {
    ExperimentConfig cfg;
    cfg.volume = "offpeak";
    cfg.n1 = 1000;
    cfg.n2 = 100000;
    cfg.n3 = 500;
    cfg.n4 = 50;
    cfg.seed = 12345;
    const ResultRow row = run_experiment_cell(cfg, 1, 4);
    CHECK(std::fabs(row.lower - 5.89744) <= 0.05);
    CHECK(std::fabs(row.upper - 5.91312) <= 0.07);
    CHECK(row.lower <= row.upper + 1.96 * (row.std_lower + row.std_upper));
}

TEST_CASE("continuation tables can be saved and reused across runs") {
    ExperimentConfig cfg = tiny_config();
    cfg.table_out = "test_saved_table.csv";
    const ResultRow first = run_experiment(cfg);
    cfg.table_out.clear();
    cfg.table_in = "test_saved_table.csv";
    const ResultRow second = run_experiment(cfg);
    CHECK(first.lower == second.lower);
    CHECK(first.upper == second.upper);
    std::remove("test_saved_table.csv");
}
