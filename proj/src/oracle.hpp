#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "contract.hpp"
#include "dual.hpp"
#include "regress.hpp"

namespace swingmc::oracle {

// Non-recombining tree with uniform branching on levels 0..horizon-1, a
// single zero-price child per terminal node at the cemetery level, and exact
// transition probabilities. Small enough instances admit exact conditional
// expectations, which makes the tree the ground truth for the Monte Carlo
// estimators.
struct FiniteTree {
    int branching = 2;
    int horizon = 3;
    std::vector<double> prices;  // per node, level-major
    std::vector<double> probs;   // P(node | parent); 1.0 for the root

    int cemetery() const { return horizon + 1; }
    int nodes_at(int level) const;
    int level_offset(int level) const;
    int node_index(int level, int pos) const { return level_offset(level) + pos; }
    int child(int level, int pos, int c) const;
    int children_count(int level) const { return level < horizon ? branching : 1; }
    int total_nodes() const { return level_offset(cemetery()) + nodes_at(cemetery()); }
    int path_count() const;

    // Node position at `level` along path p (paths are indexed by terminal
    // position).
    int path_pos(int path, int level) const;

    void validate() const;

    static FiniteTree random(std::uint64_t seed, int horizon, int branching);
};

std::vector<int> path_nodes(const FiniteTree& tree, int path);
std::vector<double> path_prices(const FiniteTree& tree, int path);
double path_probability(const FiniteTree& tree, int path);

// E[process at `level` | node] for every node of level <= `level`; entries at
// other nodes are meaningless.
std::vector<double> cond_exp_at_level(const FiniteTree& tree,
                                      std::span<const double> process, int level);

// A per-rights family of node processes together with all conditional
// expectation tables E[y_l at level d | node].
struct TreeEnvelopes {
    const FiniteTree* tree = nullptr;
    int rights = 0;
    std::vector<std::vector<double>> y;               // [l][node], l = 0..rights
    std::vector<std::vector<std::vector<double>>> ce;  // [l][level][node]

    double value(int l, int node) const { return l <= 0 ? 0.0 : y[l][node]; }
    double cond(int l, int level, int node) const {
        return l <= 0 ? 0.0 : ce[l][level][node];
    }

    static TreeEnvelopes from(const FiniteTree& tree, int rights,
                              std::vector<std::vector<double>> values);
};

// Exact dynamic program over the auxiliary problems: value with l rights at a
// node is the max of waiting one step and of exercising 1..v of the rights
// now and resuming at the refraction date. Throws when the instance exceeds
// the size guard.
TreeEnvelopes exact_value(const FiniteTree& tree, const ContractSpec& spec);

// Independent oracle: exhausts all adapted one-right-at-a-time exercise
// policies by direct recursion over (node, next right, last exercise date,
// count at that date). Identical value, different code path; stricter size
// guard.
double exact_value_enumeration(const FiniteTree& tree, const ContractSpec& spec);

struct DoobParts {
    std::vector<double> martingale;   // per node, zero at the root
    std::vector<double> compensator;  // per node, predictable, zero at the root
};
DoobParts doob_decompose(const FiniteTree& tree, std::span<const double> process);

// Per-path arrays feeding the Monte Carlo-facing dual code with exact tree
// quantities.
struct PathDualInputs {
    std::vector<double> prices;
    std::vector<std::vector<double>> martingales;       // [l-1][date]
    std::vector<std::vector<double>> refraction_terms;  // [l-1][date]
    std::vector<double> yhat, e_one, e_delta;           // SnellView storage
    SnellView snell_view() const;
    PricePath price_path() const { return {prices.data(), 0, static_cast<int>(prices.size()) - 1}; }
};
PathDualInputs path_dual_inputs(const FiniteTree& tree, const ContractSpec& spec,
                                const TreeEnvelopes& env, int path);

// Enumerates every admissible exercise chain of length `rights` over dates
// 0..cemetery of the given path prices.
void for_each_admissible_chain(const ContractSpec& spec, std::span<const double> prices,
                               const std::function<void(std::span<const int>)>& fn);

// Pathwise maximum over admissible chains of the dual summand built from
// explicit martingale and refraction-compensator inputs: the quantity the
// backward recursion must reproduce.
double brute_force_theta(const ContractSpec& spec, PricePath path,
                         const std::vector<std::vector<double>>& martingales,
                         const std::vector<std::vector<double>>& refraction_terms);

// Pathwise bound on the gap to the exact value expressed through approximate
// envelopes only (supermartingale defects plus exercise-improvement terms
// along admissible chains); zero when the envelopes are exact.
double envelope_gap_bound(const FiniteTree& tree, const ContractSpec& spec,
                          const TreeEnvelopes& env, int path);

struct DualCheck {
    double max_theta_dev = 0.0;       // max over paths |theta - exact value|
    double max_gap_bound = 0.0;       // max over paths of envelope_gap_bound
    double max_corollary_bound = 0.0; // max over paths of the loose bound
};

// Feeds the exact envelopes and their Doob decompositions through the dual
// machinery on every path; all three deviations should vanish.
DualCheck verify_dual_exactness(const FiniteTree& tree, const ContractSpec& spec);

// Probability-weighted mean of pathwise theta computed from the Doob parts of
// the supplied envelopes; an upper bound of the exact value for any inputs.
double expected_theta_from_envelopes(const FiniteTree& tree, const ContractSpec& spec,
                                     const TreeEnvelopes& env);

// Exact continuation values backed by the tree, keyed on (date, price); node
// prices are unique per level by construction.
class TreeContinuation : public ContinuationValues {
public:
    TreeContinuation(const FiniteTree& tree, const ContractSpec& spec,
                     const TreeEnvelopes& env);
    double one_step(int j, int rights_left, double price) const override;
    double delta_step(int j, int rights_left, double price) const override;

private:
    int find_node(int level, double price) const;
    const FiniteTree* tree_;
    const ContractSpec* spec_;
    const TreeEnvelopes* env_;
    std::vector<std::vector<std::pair<double, int>>> by_price_;  // per level, sorted
};

// Random small instance for randomized verification; `flavor` cycles the
// three contract presets.
struct OracleInstance {
    FiniteTree tree;
    ContractSpec spec;
};
OracleInstance random_instance(std::uint64_t seed, int index);

// Randomized cross-validation over `instances` random instances, tracking
// the worst deviation of each check.
struct SuiteReport {
    int instances = 0;
    double max_value_dev = 0.0;      // exact DP vs enumeration
    double max_theta_dev = 0.0;      // recursive dual vs exact value, exact inputs
    double max_gap_bound = 0.0;      // envelope bounds at the exact envelopes
    double max_recursion_dev = 0.0;  // recursion vs brute force, random inputs
};
SuiteReport run_oracle_suite(std::uint64_t seed, int instances);

}  // namespace swingmc::oracle
