#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

#include "model.hpp"
#include "oracle.hpp"
#include "regress.hpp"
#include "rng.hpp"

using namespace swingmc;

TEST_CASE("eval_continuation is a plain inner product") {
    ContinuationTable table(5, 2, BasisSet::standard(1.0));
    double* c = table.coeffs(StepKind::one, 0, 1);
    c[0] = 1.0;
    c[1] = 2.0;
    c[2] = 0.0;
    CHECK(eval_continuation(table, StepKind::one, 0, 1, 3.0) ==
          doctest::Approx(7.0).epsilon(1e-15));
    CHECK(eval_continuation(table, StepKind::one, 0, 0, 3.0) == 0.0);   // no rights
    CHECK(eval_continuation(table, StepKind::one, 5, 1, 3.0) == 0.0);   // date >= horizon
    CHECK(eval_continuation(table, StepKind::delta, 6, 2, 3.0) == 0.0); // cemetery
}

TEST_CASE("least squares recovers exactly affine targets") {
    const BasisSet basis = BasisSet::standard(1.0);
    std::vector<double> prices(200), targets(200);
    for (int m = 0; m < 200; ++m) {
        prices[m] = 0.2 + 2.0 * rng::uniform01(5, m, 0, 0, 0);
        targets[m] = 2.0 + 3.0 * prices[m] + 0.5 * std::max(prices[m] - 1.0, 0.0);
    }
    const auto coeffs = least_squares_coeffs(basis, prices, targets);
    CHECK(coeffs[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(coeffs[1] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(coeffs[2] == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("rank-deficient designs fall back to the minimum-norm fit") {
    const BasisSet basis = BasisSet::standard(1.0);
    std::vector<double> prices(50, 1.3), targets(50);
    double mean = 0.0;
    for (int m = 0; m < 50; ++m) {
        targets[m] = rng::uniform01(6, m, 0, 0, 0);
        mean += targets[m];
    }
    mean /= 50;
    const auto coeffs = least_squares_coeffs(basis, prices, targets);
    const double fitted = coeffs[0] + coeffs[1] * 1.3 + coeffs[2] * 0.3;
    CHECK(fitted == doctest::Approx(mean).epsilon(1e-10));
}

TEST_CASE("fitted tables vanish at the horizon and for zero rights") {
    MarketModel model;
    model.horizon = 6;
    const ContractSpec spec = preset_swing(1.0, 2, VolumeProfile::unit, 1, model.horizon);
    const PathSet paths = simulate_paths(model, 300, 17);
    const ContinuationTable table =
        fit_continuation(model, spec, paths, BasisSet::standard(1.0));
    for (int l = 0; l <= 2; ++l) {
        CHECK(table.one_step(model.horizon, l, 1.1) == 0.0);
        CHECK(table.delta_step(model.horizon, l, 1.1) == 0.0);
    }
    CHECK(table.one_step(2, 0, 1.1) == 0.0);
}

TEST_CASE("sigma = 0 reproduces the deterministic dynamic program exactly") {
    MarketModel model;
    model.sigma = 0.0;
    model.meanrev = 0.5;
    model.mu = std::log(1.5);
    model.s0 = 2.0;
    model.horizon = 4;
    const int delta = 2;
    const ContractSpec spec =
        preset_swing(1.0, 2, VolumeProfile::unit, delta, model.horizon);
    const PathSet paths = simulate_paths(model, 20, 3);
    const ContinuationTable table =
        fit_continuation(model, spec, paths, BasisSet::standard(1.0));

    // Single-branch tree holding the deterministic trajectory.
    oracle::FiniteTree tree;
    tree.branching = 1;
    tree.horizon = model.horizon;
    std::vector<double> row(model.cemetery() + 1);
    fill_path(model, 3, 0, row);
    tree.prices = row;
    tree.probs.assign(row.size(), 1.0);
    const oracle::TreeEnvelopes env = oracle::exact_value(tree, spec);

    for (int j = 0; j < model.horizon; ++j) {
        for (int l = 1; l <= 2; ++l) {
            CHECK(table.one_step(j, l, row[j]) ==
                  doctest::Approx(env.cond(l, j + 1, j)).epsilon(1e-8));
            const int jd = std::min(spec.refraction(j), model.cemetery());
            CHECK(table.delta_step(j, l, row[j]) ==
                  doctest::Approx(env.cond(l, jd, j)).epsilon(1e-8));
        }
    }
}

TEST_CASE("pathwise dynamic-program values are monotone in the rights count") {
    MarketModel model;
    model.horizon = 20;
    const ContractSpec spec = preset_swing(1.0, 3, VolumeProfile::unit, 2, model.horizon);
    const PathSet paths = simulate_paths(model, 400, 21);
    FitDiagnostics diag;
    fit_continuation(model, spec, paths, BasisSet::standard(1.0), &diag);
    for (int l = 1; l < 3; ++l)
        for (int j = 0; j < diag.dates; ++j)
            for (int m = 0; m < diag.paths; ++m)
                CHECK(diag.value(l + 1, j, m) >= diag.value(l, j, m) - 1e-12);
}

TEST_CASE("mismatched path horizon is rejected") {
    MarketModel model;
    model.horizon = 6;
    MarketModel other = model;
    other.horizon = 8;
    const ContractSpec spec = preset_swing(1.0, 2, VolumeProfile::unit, 1, 6);
    const PathSet paths = simulate_paths(other, 50, 1);
    CHECK_THROWS_AS(fit_continuation(model, spec, paths, BasisSet::standard(1.0)),
                    std::invalid_argument);
}

TEST_CASE("continuation tables round-trip through csv") {
    MarketModel model;
    model.horizon = 5;
    const ContractSpec spec = preset_swing(1.0, 2, VolumeProfile::unit, 2, model.horizon);
    const PathSet paths = simulate_paths(model, 200, 9);
    const ContinuationTable table =
        fit_continuation(model, spec, paths, BasisSet::standard(1.0));
    const std::string file = "test_table.csv";
    save_continuation_csv(table, file);
    const ContinuationTable loaded = load_continuation_csv(file, BasisSet::standard(1.0));
    for (int j = 0; j < model.horizon; ++j)
        for (int l = 1; l <= 2; ++l)
            for (double s : {0.4, 1.0, 2.7}) {
                CHECK(loaded.one_step(j, l, s) == table.one_step(j, l, s));
                CHECK(loaded.delta_step(j, l, s) == table.delta_step(j, l, s));
            }
    std::remove(file.c_str());
    CHECK_THROWS(load_continuation_csv("no_such_file.csv", BasisSet::standard(1.0)));
}
