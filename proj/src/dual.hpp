#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "contract.hpp"
#include "model.hpp"
#include "primal.hpp"
#include "regress.hpp"

namespace swingmc {

// One outer path's slice of the nested estimates: y(l, j) approximates the
// policy value started at date j with l rights, e1(l, j) its conditional
// expectation one step ahead, ed(l, j) at the post-refraction date of j.
// l = 0 rows are identically zero by convention.
struct SnellView {
    const double* yhat = nullptr;
    const double* e_one = nullptr;
    const double* e_delta = nullptr;
    int rights = 0;
    int dates = 0;  // cemetery + 1

    double y(int l, int j) const { return l >= 1 ? yhat[(l - 1) * dates + j] : 0.0; }
    double e1(int l, int j) const { return l >= 1 ? e_one[(l - 1) * dates + j] : 0.0; }
    double ed(int l, int j) const { return l >= 1 ? e_delta[(l - 1) * dates + j] : 0.0; }
};

class SnellSample {
public:
    SnellSample(int outer_count, int rights, int cemetery);

    int outer_count() const { return outer_; }
    int rights() const { return rights_; }
    int dates() const { return dates_; }

    SnellView view(int m) const;
    double* yhat(int m) { return slot(yhat_, m); }
    double* e_one(int m) { return slot(e_one_, m); }
    double* e_delta(int m) { return slot(e_delta_, m); }

private:
    double* slot(std::vector<double>& v, int m) {
        return v.data() + static_cast<std::size_t>(m) * rights_ * dates_;
    }
    int outer_;
    int rights_;
    int dates_;
    std::vector<double> yhat_, e_one_, e_delta_;
};

// Nested-simulation approximation of the policy-value process along each
// outer path: for every (m, j >= 1), inner paths are simulated from S^m_j and
// the policy is evaluated from dates j, j+1 and refraction(j) on each. The
// date-0 column reuses the larger-sample estimates stored in `lower`, which
// markedly reduces the upper bound's variance.
SnellSample sample_snell(const ContinuationTable& table, const ContractSpec& spec,
                         const MarketModel& model, const PathSet& outer_paths,
                         int inner_count, const LowerEstimate& lower,
                         std::uint64_t seed);

// Pathwise dual value theta at date 0 computed backward over dates and
// residual-rights offsets, with the Doob increments expressed through the
// nested estimates. Cost is O(dates * rights * max volume) per path.
double theta_recursion(const ContractSpec& spec, const SnellView& snell,
                       PricePath path);

// Same recursion for explicit inputs: martingales M[l-1][j] and refraction
// compensator terms B[l-1][j] standing in for A_{rho(j)} - E_j A_{rho(j)},
// l = 1..rights, j = 0..cemetery. Used with exact Doob decompositions and in
// randomized equivalence checks against brute-force chain maximization.
double theta_recursion_inputs(const ContractSpec& spec, PricePath path,
                              const std::vector<std::vector<double>>& martingales,
                              const std::vector<std::vector<double>>& refraction_terms);

struct UpperEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    std::int64_t count = 0;
};

UpperEstimate upper_bound(const ContractSpec& spec, const SnellSample& snell,
                          const PathSet& outer_paths);

// Looser one-pass bound on the duality gap that avoids the recursive maximum:
// a date-sum of positive-part supermartingale defects plus a per-right
// maximum of exercise-improvement terms, weighted by running maxima of V.
double corollary_bound(const ContractSpec& spec, const SnellView& snell, PricePath path);

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
};

// 95% interval [lower.mean - 1.96 lower.std, upper.mean + 1.96 upper.std];
// the two estimates must come from independent seeds.
ConfidenceInterval confidence_interval(const LowerEstimate& lower,
                                       const UpperEstimate& upper);

// Diagnostic dumps: per-path theta values and the full nested-estimate
// slices, one CSV each.
void dump_theta_csv(const ContractSpec& spec, const SnellSample& snell,
                    const PathSet& outer_paths, const std::string& path);
void dump_snell_csv(const SnellSample& snell, const std::string& path);

}  // namespace swingmc
