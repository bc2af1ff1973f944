#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "dual.hpp"
#include "model.hpp"
#include "oracle.hpp"
#include "parallel.hpp"
#include "primal.hpp"
#include "regress.hpp"

using namespace swingmc;
using oracle::FiniteTree;

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

}  // namespace

TEST_CASE("deterministic toy: theta recovers the chain maximum") {
    const FiniteTree tree = deterministic_tree({2.0, 4.0, 3.0});
    const ContractSpec spec = preset_swing(1.0, 2, VolumeProfile::unit, 1, tree.horizon);
    const auto env = oracle::exact_value(tree, spec);
    const auto in = oracle::path_dual_inputs(tree, spec, env, 0);
    CHECK(theta_recursion(spec, in.snell_view(), in.price_path()) ==
          doctest::Approx(5.0).epsilon(1e-12));
    CHECK(theta_recursion_inputs(spec, in.price_path(), in.martingales,
                                 in.refraction_terms) ==
          doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("zero dual inputs turn theta into the plain pathwise maximum") {
    const FiniteTree tree = deterministic_tree({2.0, 4.0, 3.0});
    const ContractSpec spec = preset_swing(1.0, 2, VolumeProfile::unit, 1, tree.horizon);
    const int dates = tree.cemetery() + 1;
    const std::vector<std::vector<double>> zeros(2, std::vector<double>(dates, 0.0));
    const auto prices = oracle::path_prices(tree, 0);
    const PricePath path{prices.data(), 0, tree.cemetery()};
    CHECK(theta_recursion_inputs(spec, path, zeros, zeros) ==
          doctest::Approx(5.0).epsilon(1e-12));
    CHECK(oracle::brute_force_theta(spec, path, zeros, zeros) ==
          doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("noise-free nested sampling has zero variance") {
    MarketModel model;
    model.sigma = 0.0;
    model.meanrev = 0.4;
    model.mu = std::log(1.4);
    model.s0 = 1.8;
    model.horizon = 6;
    const ContractSpec spec = preset_swing(1.0, 2, VolumeProfile::unit, 2, model.horizon);
    const PathSet fit_paths = simulate_paths(model, 30, 1);
    const ContinuationTable table =
        fit_continuation(model, spec, fit_paths, BasisSet::standard(1.0));
    const LowerEstimate lower = lower_bound(table, spec, model, 100, 2);
    CHECK(lower.std_err < 1e-7);
    const PathSet outer = simulate_paths(model, 5, 3);
    const SnellSample snell = sample_snell(table, spec, model, outer, 7, lower, 4);

    // Inner averages equal the deterministic policy value started at each date.
    std::vector<double> row(model.cemetery() + 1);
    fill_path(model, 9, 0, row);
    PolicyContext ctx;
    ctx.build(table, spec, PricePath{row.data(), 0, model.cemetery()});
    const SnellView view = snell.view(2);
    for (int j = 1; j <= model.horizon; ++j)
        for (int l = 1; l <= 2; ++l) {
            CHECK(view.y(l, j) == doctest::Approx(ctx.value(j, l)).epsilon(1e-12));
            CHECK(view.e1(l, j) ==
                  doctest::Approx(ctx.value(std::min(j + 1, model.cemetery()), l))
                      .epsilon(1e-12));
        }
    const UpperEstimate upper = upper_bound(spec, snell, outer);
    CHECK(upper.std_err == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(upper.mean >= lower.mean - 1e-9);
}

TEST_CASE("snell sample columns at date zero reuse the larger-sample estimates") {
    MarketModel model;
    model.horizon = 8;
    const ContractSpec spec = preset_swing(1.0, 2, VolumeProfile::unit, 2, model.horizon);
    const PathSet fit_paths = simulate_paths(model, 200, 5);
    const ContinuationTable table =
        fit_continuation(model, spec, fit_paths, BasisSet::standard(1.0));
    const LowerEstimate lower = lower_bound(table, spec, model, 2000, 6);
    const PathSet outer = simulate_paths(model, 20, 7);
    const SnellSample snell = sample_snell(table, spec, model, outer, 10, lower, 8);
    for (int m = 0; m < outer.count(); ++m) {
        const SnellView view = snell.view(m);
        for (int l = 1; l <= 2; ++l) {
            CHECK(view.y(l, 0) == lower.start0[l - 1]);
            CHECK(view.e1(l, 0) == lower.start_one[l - 1]);
            CHECK(view.ed(l, 0) == lower.start_delta[l - 1]);
            CHECK(view.y(l, model.cemetery()) == 0.0);
        }
    }
}

TEST_CASE("doob increments of the nested estimates are centered") {
    MarketModel model;
    model.horizon = 10;
    const ContractSpec spec = preset_swing(1.0, 2, VolumeProfile::unit, 1, model.horizon);
    const PathSet fit_paths = simulate_paths(model, 300, 11);
    const ContinuationTable table =
        fit_continuation(model, spec, fit_paths, BasisSet::standard(1.0));
    const LowerEstimate lower = lower_bound(table, spec, model, 5000, 12);
    const int n3 = 400;
    const PathSet outer = simulate_paths(model, n3, 13);
    const SnellSample snell = sample_snell(table, spec, model, outer, 40, lower, 14);
    for (int l = 1; l <= 2; ++l) {
        for (int j : {0, 3, 7}) {
            double sum = 0.0, sumsq = 0.0;
            for (int m = 0; m < n3; ++m) {
                const SnellView v = snell.view(m);
                const double inc = v.y(l, j + 1) - v.e1(l, j);
                sum += inc;
                sumsq += inc * inc;
            }
            const double mean = sum / n3;
            const double sd = std::sqrt((sumsq - n3 * mean * mean) / (n3 - 1.0) / n3);
            CHECK(std::fabs(mean) < 3.0 * sd + 1e-12);
        }
    }
}

TEST_CASE("confidence intervals use the 1.96 normal quantile") {
    LowerEstimate lower;
    lower.mean = 3.3116;
    lower.std_err = (3.3116 - 3.30738) / 1.96;
    UpperEstimate upper;
    upper.mean = 3.3211;
    upper.std_err = (3.32229 - 3.3211) / 1.96;
    const ConfidenceInterval ci = confidence_interval(lower, upper);
    CHECK(ci.lo == doctest::Approx(3.30738).epsilon(1e-9));
    CHECK(ci.hi == doctest::Approx(3.32229).epsilon(1e-9));

    LowerEstimate exact_low;
    exact_low.mean = 2.0;
    UpperEstimate exact_up;
    exact_up.mean = 2.5;
    const ConfidenceInterval degenerate = confidence_interval(exact_low, exact_up);
    CHECK(degenerate.lo == 2.0);
    CHECK(degenerate.hi == 2.5);
}

TEST_CASE("nested sampling is bitwise reproducible for any worker count") {
    MarketModel model;
    model.horizon = 8;
    const ContractSpec spec = preset_swing(1.0, 2, VolumeProfile::unit, 2, model.horizon);
    const PathSet fit_paths = simulate_paths(model, 150, 21);
    const ContinuationTable table =
        fit_continuation(model, spec, fit_paths, BasisSet::standard(1.0));
    const LowerEstimate lower = lower_bound(table, spec, model, 1000, 22);
    const PathSet outer = simulate_paths(model, 30, 23);
    std::vector<UpperEstimate> uppers;
    for (int workers : {1, 4, 16}) {
        par::set_workers(workers);
        const SnellSample snell = sample_snell(table, spec, model, outer, 15, lower, 24);
        uppers.push_back(upper_bound(spec, snell, outer));
    }
    par::set_workers(0);
    CHECK(uppers[1].mean == uppers[0].mean);
    CHECK(uppers[2].mean == uppers[0].mean);
    CHECK(uppers[1].std_err == uppers[0].std_err);
}

TEST_CASE("diagnostic dumps are written") {
    MarketModel model;
    model.horizon = 5;
    const ContractSpec spec = preset_swing(1.0, 1, VolumeProfile::unit, 1, model.horizon);
    const PathSet fit_paths = simulate_paths(model, 100, 25);
    const ContinuationTable table =
        fit_continuation(model, spec, fit_paths, BasisSet::standard(1.0));
    const LowerEstimate lower = lower_bound(table, spec, model, 500, 26);
    const PathSet outer = simulate_paths(model, 4, 27);
    const SnellSample snell = sample_snell(table, spec, model, outer, 5, lower, 28);
    dump_theta_csv(spec, snell, outer, "test_theta.csv");
    dump_snell_csv(snell, "test_snell.csv");
    FILE* f1 = std::fopen("test_theta.csv", "r");
    FILE* f2 = std::fopen("test_snell.csv", "r");
    REQUIRE(f1 != nullptr);
    REQUIRE(f2 != nullptr);
    std::fclose(f1);
    std::fclose(f2);
    std::remove("test_theta.csv");
    std::remove("test_snell.csv");
}
