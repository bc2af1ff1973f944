#pragma once

#include <functional>
#include <span>
#include <vector>

namespace swingmc {

// Number of entries of the non-decreasing prefix j_1..j_p equal to its last
// element, i.e. how many rights the chain exercises at j_p.
int exercise_count(std::span<const int> chain_prefix);

struct ExerciseChain {
    std::vector<int> dates;  // non-decreasing, values in {0..cemetery}
};

enum class VolumeProfile { unit, offpeak };

// Generic multi-exercise contract: exercising the k-th right at date j pays
// U^k_j times the product of V^l at the dates of the earlier exercises.
// Admissibility combines a per-date volume cap v_j with a refraction rule:
// an exercise at a strictly later date than the previous one must wait until
// refraction(previous date).
struct ContractSpec {
    int rights = 1;                // L
    double strike = 1.0;           // K, used by the presets
    int horizon = 50;              // T; the cemetery date is horizon + 1

    // u_eval(p, j, price): payoff factor U^p_j for right p in 1..rights.
    std::function<double(int, int, double)> u_eval;
    // v_eval(l, j, price): multiplicative factor V^l_j for l in 1..rights-1.
    std::function<double(int, int, double)> v_eval;
    // volume(j, price): max rights exercisable at date j, in 1..rights,
    // with volume(cemetery) = rights.
    std::function<int(int, double)> volume;
    // refraction(i): first admissible date after an exercise at i, in
    // i+1..cemetery.
    std::function<int(int)> refraction;

    // True when V == 1 and U^p does not depend on p (the swing case), which
    // lets hot loops skip the generic product bookkeeping.
    bool additive = false;

    int cemetery() const { return horizon + 1; }

    // Immediate value of exercising n rights at date j when `remaining`
    // rights (indices rights-remaining+1 .. rights) are left:
    // sum_{p=k}^{k+n-1} U^p_j prod_{l=k}^{p-1} V^l_j with k = rights-remaining+1.
    double immediate_value(int remaining, int n, int j, double price) const;

    // prod_{l=k}^{k+n-1} V^l_j, the factor carried into the continuation
    // after exercising n rights at date j (V^rights is treated as 1).
    double v_product(int remaining, int n, int j, double price) const;

    // Value of exercising all `remaining` rights at the cemetery date.
    double cemetery_value(int remaining, double cemetery_price) const;
};

// Checks the volume and refraction constraints of the non-decreasing prefix
// j_1..j_p; prices must hold the path prices at those dates.
bool is_admissible(const ContractSpec& spec, std::span<const int> chain_prefix,
                   std::span<const double> prices_at_dates);

// Pre-cashflow of a full admissible chain:
// sum_{k=1}^{L} U^k_{j_k} prod_{l=1}^{k-1} V^l_{j_l}.
double chain_payoff(const ContractSpec& spec, const ExerciseChain& chain,
                    std::span<const double> prices_at_dates);

// Swing option: V == 1, U^p_j = (S_j - K)^+, unit or off-peak volume caps,
// constant refraction period delta.
ContractSpec preset_swing(double strike, int rights, VolumeProfile profile, int delta,
                          int horizon);

// Exponential utility of the accumulated swing payoff with risk aversion
// alpha: V^l_j = exp(-alpha Z_j), U^p = 0 for p < L and U^L_j = -exp(-alpha Z_j).
ContractSpec preset_exp_utility(double alpha, double strike, int rights,
                                VolumeProfile profile, int delta, int horizon);

// Liquidation of `rights` shares with linear price impact through the
// resilience exponent: U^k_j = S_j exp(b (a j - 1)(k - 1)), V^l_j = exp(-a b j).
// Requires horizon <= 1/a. Volume and refraction are unconstrained.
ContractSpec preset_liquidation(double impact_a, double impact_b, int rights,
                                int horizon);

// Off-peak calendar helper: date 0 is a Monday; weekend dates are
// j mod 7 in {5, 6}.
bool is_weekend(int date);

}  // namespace swingmc
