#pragma once

#include <cstdint>
#include <vector>

#include "contract.hpp"
#include "model.hpp"
#include "regress.hpp"

namespace swingmc {

struct PolicyRun {
    ExerciseChain chain;
    double payoff = 0.0;
};

// Exercise decisions of the threshold rule along one fixed path: at each date
// j with q rights left, exercise the count n maximizing
//   immediate(q, n, j) + V-product * C^{delta, q-n}_j
// as soon as that maximum reaches C^{1, q}_j (ties exercise, ties in n pick
// the smallest count). Building the tables once per path makes policy
// evaluations from every (start date, rights) pair cheap, which the nested
// dual simulation leans on.
class PolicyContext {
public:
    void build(const ContinuationValues& cont, const ContractSpec& spec, PricePath path);

    // Realized payoff of the policy started at start_date with `rights`
    // rights left; all remaining rights are exercised at the cemetery.
    double value(int start_date, int rights) const;

    // Same walk, also collecting the exercise dates.
    PolicyRun run(int start_date, int rights) const;

private:
    const ContractSpec* spec_ = nullptr;
    PricePath path_{};
    int first_ = 0;
    int cemetery_ = 0;
    int max_rights_ = 0;
    std::vector<std::uint8_t> exercise_n_;  // [date - first][q - 1]; 0 = wait

    template <typename OnExercise>
    double walk(int start_date, int rights, OnExercise&& on_exercise) const;
};

// One-shot policy evaluation; `earliest` carries a refraction bound inherited
// from an exercise before start_date (pass start_date when none binds).
PolicyRun run_policy(const ContinuationValues& cont, const ContractSpec& spec,
                     PricePath path, int start_date, int rights, int earliest);

// Low-biased price estimate from fresh paths, plus the per-rights policy
// values started at dates 0, 1 and refraction(0) that the dual's
// variance-reduced date-0 column reuses.
struct LowerEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    std::int64_t count = 0;
    std::vector<double> start0;       // policy value from date 0, index l-1
    std::vector<double> start_one;    // from date 1
    std::vector<double> start_delta;  // from refraction(0)
};

LowerEstimate lower_bound(const ContinuationTable& table, const ContractSpec& spec,
                          const MarketModel& model, std::int64_t n2, std::uint64_t seed);

}  // namespace swingmc
