#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "contract.hpp"
#include "dual.hpp"
#include "oracle.hpp"
#include "rng.hpp"

using namespace swingmc;
using oracle::FiniteTree;
using oracle::TreeEnvelopes;

namespace {

FiniteTree deterministic_tree(const std::vector<double>& prices_through_horizon) {
    FiniteTree tree;
    tree.branching = 1;
    tree.horizon = static_cast<int>(prices_through_horizon.size()) - 1;
    tree.prices = prices_through_horizon;
    tree.prices.push_back(0.0);
    tree.probs.assign(tree.prices.size(), 1.0);
    return tree;
}

// Positive noise on dates <= horizon, exact cemetery values: the shape every
// sensible approximation has.
TreeEnvelopes noisy_envelopes(const FiniteTree& tree, const ContractSpec& spec,
                              const TreeEnvelopes& exact, std::uint64_t seed,
                              double scale) {
    std::vector<std::vector<double>> y = exact.y;
    for (int l = 1; l <= spec.rights; ++l)
        for (int level = 0; level <= tree.horizon; ++level)
            for (int pos = 0; pos < tree.nodes_at(level); ++pos) {
                const int node = tree.node_index(level, pos);
                y[l][node] += scale * rng::uniform01(seed, l, node, 0, 0);
            }
    return TreeEnvelopes::from(tree, spec.rights, std::move(y));
}

}  // namespace

TEST_CASE("deterministic toy: both oracles give 5") {
    const FiniteTree tree = deterministic_tree({2.0, 4.0, 3.0});  // payoffs 1, 3, 2
    const ContractSpec spec = preset_swing(1.0, 2, VolumeProfile::unit, 1, tree.horizon);
    const TreeEnvelopes env = oracle::exact_value(tree, spec);
    CHECK(env.value(2, 0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(oracle::exact_value_enumeration(tree, spec) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("zero rights are worth zero") {
    const FiniteTree tree = deterministic_tree({2.0, 4.0, 3.0});
    ContractSpec spec = preset_swing(1.0, 1, VolumeProfile::unit, 1, tree.horizon);
    spec.rights = 0;
    const TreeEnvelopes env = oracle::exact_value(tree, spec);
    CHECK(env.value(0, 0) == 0.0);
    CHECK(oracle::exact_value_enumeration(tree, spec) == 0.0);
}

TEST_CASE("single in-the-money date prices its intrinsic value") {
    const FiniteTree tree = deterministic_tree({2.0, 0.5});
    const ContractSpec spec = preset_swing(1.0, 1, VolumeProfile::unit, 1, tree.horizon);
    CHECK(oracle::exact_value(tree, spec).value(1, 0) == doctest::Approx(1.0));
    CHECK(oracle::exact_value_enumeration(tree, spec) == doctest::Approx(1.0));
}

TEST_CASE("exponential utility of a worthless payoff is -1") {
    FiniteTree tree = FiniteTree::random(4, 3, 2);
    const ContractSpec spec =
        preset_exp_utility(1.1, 50.0, 2, VolumeProfile::unit, 2, tree.horizon);
    CHECK(oracle::exact_value(tree, spec).value(2, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(oracle::exact_value_enumeration(tree, spec) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("a refraction period beyond the horizon reduces to a single right") {
    for (int i = 0; i < 10; ++i) {
        const FiniteTree tree = FiniteTree::random(100 + i, 1 + i % 4, 2);
        const ContractSpec two =
            preset_swing(1.0, 2, VolumeProfile::unit, tree.horizon + 1, tree.horizon);
        const ContractSpec one = preset_swing(1.0, 1, VolumeProfile::unit, 1, tree.horizon);
        CHECK(oracle::exact_value(tree, two).value(2, 0) ==
              doctest::Approx(oracle::exact_value(tree, one).value(1, 0)).epsilon(1e-12));
    }
}

TEST_CASE("one-right-at-a-time enumeration agrees with the n-at-once dynamic program") {
    for (int i = 0; i < 30; ++i) {
        const auto inst = oracle::random_instance(31337, i);
        const double dp = oracle::exact_value(inst.tree, inst.spec).value(inst.spec.rights, 0);
        const double en = oracle::exact_value_enumeration(inst.tree, inst.spec);
        CHECK(std::fabs(dp - en) < 1e-12);
    }
}

TEST_CASE("exact doob inputs make the dual pathwise exact") {
    for (int i = 0; i < 30; ++i) {
        const auto inst = oracle::random_instance(555, i);
        const auto check = oracle::verify_dual_exactness(inst.tree, inst.spec);
        CHECK(check.max_theta_dev < 1e-10);
        CHECK(check.max_gap_bound < 1e-10);
        CHECK(check.max_corollary_bound < 1e-10);
    }
}

TEST_CASE("perturbed envelopes keep the dual biased high") {
    for (int i = 0; i < 10; ++i) {
        const auto inst = oracle::random_instance(777, i);
        const TreeEnvelopes exact = oracle::exact_value(inst.tree, inst.spec);
        const TreeEnvelopes noisy =
            noisy_envelopes(inst.tree, inst.spec, exact, 900 + i, 0.25);
        const double mean = oracle::expected_theta_from_envelopes(inst.tree, inst.spec, noisy);
        CHECK(mean >= exact.value(inst.spec.rights, 0) - 1e-10);
    }
}

TEST_CASE("random martingale and compensator inputs keep the dual biased high") {
    for (int i = 0; i < 10; ++i) {
        const auto inst = oracle::random_instance(4242, i);
        const ContractSpec& spec = inst.spec;
        const FiniteTree& tree = inst.tree;
        const int L = spec.rights;
        const int pd = tree.cemetery();
        const double exact = oracle::exact_value(tree, spec).value(L, 0);

        // Martingales from the Doob part of a random adapted process plus a
        // random adapted compensator surrogate.
        std::vector<std::vector<double>> mart_nodes(L);
        std::vector<std::vector<double>> comp_nodes(L);
        for (int l = 0; l < L; ++l) {
            std::vector<double> raw(tree.total_nodes());
            comp_nodes[l].resize(tree.total_nodes());
            for (int node = 0; node < tree.total_nodes(); ++node) {
                raw[node] = rng::normal(1000 + i, 1, l, node, 0);
                comp_nodes[l][node] = rng::normal(1000 + i, 2, l, node, 0);
            }
            mart_nodes[l] = oracle::doob_decompose(tree, raw).martingale;
        }

        double mean = 0.0;
        for (int p = 0; p < tree.path_count(); ++p) {
            const auto nodes = oracle::path_nodes(tree, p);
            const auto prices = oracle::path_prices(tree, p);
            std::vector<std::vector<double>> mart(L, std::vector<double>(pd + 1, 0.0));
            std::vector<std::vector<double>> refr(L, std::vector<double>(pd + 1, 0.0));
            for (int l = 0; l < L; ++l) {
                for (int j = 0; j <= pd; ++j) mart[l][j] = mart_nodes[l][nodes[j]];
                for (int idate = 0; idate <= tree.horizon; ++idate) {
                    const int jd = std::min(spec.refraction(idate), pd);
                    const auto ce =
                        oracle::cond_exp_at_level(tree, comp_nodes[l], jd);
                    refr[l][idate] = comp_nodes[l][nodes[jd]] - ce[nodes[idate]];
                }
            }
            const PricePath path{prices.data(), 0, pd};
            mean += oracle::path_probability(tree, p) *
                    theta_recursion_inputs(spec, path, mart, refr);
        }
        CHECK(mean >= exact - 1e-9);
    }
}

TEST_CASE("the loose bound dominates the chain bound which dominates the dual gap") {
    for (int i = 0; i < 10; ++i) {
        const auto inst = oracle::random_instance(808, i);
        const TreeEnvelopes exact = oracle::exact_value(inst.tree, inst.spec);
        const TreeEnvelopes noisy =
            noisy_envelopes(inst.tree, inst.spec, exact, 33 + i, 0.3);
        for (int p = 0; p < inst.tree.path_count(); ++p) {
            const auto in = oracle::path_dual_inputs(inst.tree, inst.spec, noisy, p);
            const double theta = theta_recursion_inputs(inst.spec, in.price_path(),
                                                        in.martingales, in.refraction_terms);
            const double gap = theta - noisy.value(inst.spec.rights, 0);
            const double chain_bound =
                oracle::envelope_gap_bound(inst.tree, inst.spec, noisy, p);
            const double loose =
                corollary_bound(inst.spec, in.snell_view(), in.price_path());
            CHECK(chain_bound >= gap - 1e-9);
            CHECK(loose >= chain_bound - 1e-9);
        }
    }
}

TEST_CASE("oversized instances are rejected") {
    const FiniteTree tree = FiniteTree::random(1, 12, 2);
    const ContractSpec spec = preset_swing(1.0, 3, VolumeProfile::unit, 1, tree.horizon);
    CHECK_THROWS_AS(oracle::exact_value(tree, spec), std::invalid_argument);
    const FiniteTree mid = FiniteTree::random(1, 11, 2);
    const ContractSpec spec1 = preset_swing(1.0, 2, VolumeProfile::unit, 1, mid.horizon);
    CHECK_THROWS_AS(oracle::exact_value_enumeration(mid, spec1), std::invalid_argument);
}

TEST_CASE("tree validation catches malformed instances") {
    FiniteTree tree = FiniteTree::random(2, 2, 2);
    tree.probs[1] = 0.9;  // child probabilities no longer sum to one
    CHECK_THROWS_AS(tree.validate(), std::invalid_argument);
}
