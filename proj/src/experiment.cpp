#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"
#include "rng.hpp"

namespace swingmc {

namespace {
std::vector<int> parse_int_list(const std::string& text, const std::string& key) {
    std::vector<int> out;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad integer '" + tok + "' for " + key);
        }
    }
    if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number '" + v + "' for " + key);
    }
}

std::int64_t parse_int64(const std::string& v, const std::string& key) {
    try {
        return std::stoll(v);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer '" + v + "' for " + key);
    }
}
}  // namespace

void ExperimentConfig::validate() const {
    model().validate();
    if (preset != "swing" && preset != "exputil" && preset != "liquidation")
        throw std::invalid_argument("config: preset must be swing, exputil or liquidation");
    if (volume != "unit" && volume != "offpeak")
        throw std::invalid_argument("config: volume must be unit or offpeak");
    for (int d : deltas)
        if (d < 1) throw std::invalid_argument("config: delta must be >= 1");
    for (int l : rights)
        if (l < 1) throw std::invalid_argument("config: rights must be >= 1");
    if (effective_n1() < 1 || n2 < 1 || n3 < 1 || n4 < 1)
        throw std::invalid_argument("config: simulation sizes must be >= 1");
    if (preset == "exputil" && alpha <= 0.0)
        throw std::invalid_argument("config: alpha must be > 0");
    if (preset == "liquidation" &&
        (impact_a <= 0.0 || impact_b <= 0.0 ||
         static_cast<double>(horizon) > 1.0 / impact_a))
        throw std::invalid_argument(
            "config: liquidation needs impact_a, impact_b > 0 and horizon <= 1/impact_a");
}

std::int64_t ExperimentConfig::effective_n1() const {
    if (n1 > 0) return n1;
    return volume == "offpeak" ? 10000 : 1000;
}

MarketModel ExperimentConfig::model() const {
    MarketModel m;
    m.sigma = sigma;
    m.meanrev = meanrev;
    m.mu = mu;
    m.s0 = s0;
    m.horizon = horizon;
    return m;
}

ContractSpec ExperimentConfig::contract(int delta, int n_rights) const {
    const VolumeProfile profile =
        volume == "offpeak" ? VolumeProfile::offpeak : VolumeProfile::unit;
    if (preset == "swing")
        return preset_swing(strike, n_rights, profile, delta, horizon);
    if (preset == "exputil")
        return preset_exp_utility(alpha, strike, n_rights, profile, delta, horizon);
    return preset_liquidation(impact_a, impact_b, n_rights, horizon);
}

ResultRow run_experiment_cell(const ExperimentConfig& config, int delta, int n_rights) {
    config.validate();
    par::set_workers(config.threads);
    const auto t0 = std::chrono::steady_clock::now();

    const MarketModel model = config.model();
    const ContractSpec spec = config.contract(delta, n_rights);
    const BasisSet basis = BasisSet::standard(config.strike);

    // Independent stage streams, also separated per grid cell.
    const std::uint64_t cell = rng::derive_stream(
        config.seed, (static_cast<std::uint64_t>(delta) << 16) |
                         static_cast<std::uint64_t>(n_rights));
    const std::uint64_t seed_fit = rng::derive_stream(cell, 1);
    const std::uint64_t seed_lower = rng::derive_stream(cell, 2);
    const std::uint64_t seed_outer = rng::derive_stream(cell, 3);
    const std::uint64_t seed_inner = rng::derive_stream(cell, 4);

    ContinuationTable table = [&] {
        if (!config.table_in.empty()) return load_continuation_csv(config.table_in, basis);
        const PathSet fit_paths =
            simulate_paths(model, static_cast<int>(config.effective_n1()), seed_fit);
        return fit_continuation(model, spec, fit_paths, basis);
    }();
    if (!config.table_out.empty()) save_continuation_csv(table, config.table_out);

    const LowerEstimate lower = lower_bound(table, spec, model, config.n2, seed_lower);
    const PathSet outer = simulate_paths(model, config.n3, seed_outer);
    const SnellSample snell =
        sample_snell(table, spec, model, outer, config.n4, lower, seed_inner);
    const UpperEstimate upper = upper_bound(spec, snell, outer);
    const ConfidenceInterval ci = confidence_interval(lower, upper);

    if (!config.dual_dump.empty()) {
        dump_theta_csv(spec, snell, outer, config.dual_dump + "_theta.csv");
        dump_snell_csv(snell, config.dual_dump + "_snell.csv");
    }

    ResultRow row;
    row.delta = delta;
    row.rights = n_rights;
    row.lower = lower.mean;
    row.upper = upper.mean;
    row.ci_low = ci.lo;
    row.ci_high = ci.hi;
    row.std_lower = lower.std_err;
    row.std_upper = upper.std_err;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

ResultRow run_experiment(const ExperimentConfig& config) {
    if (config.deltas.empty() || config.rights.empty())
        throw std::invalid_argument("config: empty delta/rights grid");
    return run_experiment_cell(config, config.deltas.front(), config.rights.front());
}

std::string format_csv(const std::vector<ResultRow>& rows, bool timing_in_csv) {
    std::string out = "delta,L,lower,upper,ci_low,ci_high,std_lower,std_upper,seconds\n";
    char buf[256];
    for (const ResultRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                      r.delta, r.rights, r.lower, r.upper, r.ci_low, r.ci_high,
                      r.std_lower, r.std_upper, timing_in_csv ? r.seconds : 0.0);
        out += buf;
    }
    return out;
}

std::vector<ResultRow> run_table(const ExperimentConfig& config, const RowCallback& on_row) {
    config.validate();
    std::vector<ResultRow> rows;
    for (int delta : config.deltas) {
        for (int n_rights : config.rights) {
            try {
                ResultRow row = run_experiment_cell(config, delta, n_rights);
                rows.push_back(row);
                if (on_row) on_row(delta, n_rights, &row, nullptr);
            } catch (const std::exception& e) {
                const std::string msg = e.what();
                if (on_row) on_row(delta, n_rights, nullptr, &msg);
            }
        }
    }
    if (!config.out.empty()) {
        std::ofstream file(config.out, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open " + config.out + " for writing");
        file << format_csv(rows, config.timing_in_csv);
    }
    return rows;
}

void set_config_value(ExperimentConfig& config, const std::string& key,
                      const std::string& value) {
    if (key == "sigma") config.sigma = parse_double(value, key);
    else if (key == "meanrev") config.meanrev = parse_double(value, key);
    else if (key == "mu") config.mu = parse_double(value, key);
    else if (key == "s0") config.s0 = parse_double(value, key);
    else if (key == "horizon") config.horizon = static_cast<int>(parse_int64(value, key));
    else if (key == "preset") config.preset = value;
    else if (key == "volume") config.volume = value;
    else if (key == "strike") config.strike = parse_double(value, key);
    else if (key == "alpha") config.alpha = parse_double(value, key);
    else if (key == "impact_a") config.impact_a = parse_double(value, key);
    else if (key == "impact_b") config.impact_b = parse_double(value, key);
    else if (key == "delta") config.deltas = parse_int_list(value, key);
    else if (key == "rights") config.rights = parse_int_list(value, key);
    else if (key == "n1") config.n1 = parse_int64(value, key);
    else if (key == "n2") config.n2 = parse_int64(value, key);
    else if (key == "n3") config.n3 = static_cast<int>(parse_int64(value, key));
    else if (key == "n4") config.n4 = static_cast<int>(parse_int64(value, key));
    else if (key == "seed") config.seed = static_cast<std::uint64_t>(parse_int64(value, key));
    else if (key == "threads") config.threads = static_cast<int>(parse_int64(value, key));
    else if (key == "out") config.out = value;
    else if (key == "timing_in_csv") config.timing_in_csv = parse_int64(value, key) != 0;
    else if (key == "table_out") config.table_out = value;
    else if (key == "table_in") config.table_in = value;
    else if (key == "dual_dump") config.dual_dump = value;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

void load_config_file(ExperimentConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key = value");
        set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

}  // namespace swingmc
