#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "contract.hpp"
#include "model.hpp"

namespace swingmc {

// Ordered set of real basis functions of the current price.
struct BasisSet {
    std::vector<std::function<double(double)>> functions;

    // {1, x, (x - strike)^+}: the two payoff-shaped functions plus an
    // intercept, which strictly enlarges their span.
    static BasisSet standard(double strike);

    int size() const { return static_cast<int>(functions.size()); }
    void eval(double price, double* out) const {
        for (std::size_t i = 0; i < functions.size(); ++i) out[i] = functions[i](price);
    }
};

enum class StepKind { one, delta };

// Consumers of continuation values (the exercise policy, the oracle tests)
// only need pointwise evaluation; this keeps exact tree-based values and
// regression tables interchangeable.
class ContinuationValues {
public:
    virtual ~ContinuationValues() = default;
    // E[value with `rights_left` rights at the next date | price at j].
    virtual double one_step(int j, int rights_left, double price) const = 0;
    // Same conditional expectation at the post-refraction date of j.
    virtual double delta_step(int j, int rights_left, double price) const = 0;
    // Fills c_one[l-1], c_delta[l-1] for l = 1..max_rights in one call.
    virtual void eval_all(int j, double price, int max_rights, double* c_one,
                          double* c_delta) const;
};

// Regression coefficients approximating the one-step and post-refraction
// continuation values for every date and remaining-rights count. Rows at
// dates >= horizon and for zero rights are identically zero.
class ContinuationTable : public ContinuationValues {
public:
    ContinuationTable(int horizon, int rights, BasisSet basis);

    int horizon() const { return horizon_; }
    int rights() const { return rights_; }
    const BasisSet& basis() const { return basis_; }

    double* coeffs(StepKind kind, int j, int l);
    const double* coeffs(StepKind kind, int j, int l) const;

    double eval(StepKind kind, int j, int l, double price) const;
    double eval_with_basis(StepKind kind, int j, int l, const double* basis_values) const;

    double one_step(int j, int rights_left, double price) const override;
    double delta_step(int j, int rights_left, double price) const override;
    void eval_all(int j, double price, int max_rights, double* c_one,
                  double* c_delta) const override;

private:
    int horizon_;
    int rights_;
    BasisSet basis_;
    int nb_;
    std::vector<double> data_;  // [kind][date 0..horizon][rights 1..L][basis]
};

double eval_continuation(const ContinuationTable& table, StepKind kind, int j, int l,
                         double price);

// Optional capture of the pathwise dynamic-program values produced while
// fitting; values(l, j, m) with l = 0..rights, j = 0..cemetery.
struct FitDiagnostics {
    int rights = 0;
    int dates = 0;
    int paths = 0;
    std::vector<double> values;
    double value(int l, int j, int m) const {
        return values[(static_cast<std::size_t>(l) * dates + j) * paths + m];
    }
};

// Solves the auxiliary dynamic program approximately by least-squares Monte
// Carlo over `paths`, regressing realized next-date and post-refraction
// values on the basis at each date. Rank-deficient designs (e.g. sigma = 0)
// fall back to the minimum-norm solution.
ContinuationTable fit_continuation(const MarketModel& model, const ContractSpec& spec,
                                   const PathSet& paths, const BasisSet& basis,
                                   FitDiagnostics* diagnostics = nullptr);

// Minimum-norm least squares of `targets` on the basis evaluated at `prices`;
// the elementary solve fit_continuation applies date by date.
std::vector<double> least_squares_coeffs(const BasisSet& basis,
                                         std::span<const double> prices,
                                         std::span<const double> targets);

// Flat CSV persistence: one row per (kind, date, rights) holding the
// coefficient vector. Loading validates against the supplied basis.
void save_continuation_csv(const ContinuationTable& table, const std::string& path);
ContinuationTable load_continuation_csv(const std::string& path, BasisSet basis);

}  // namespace swingmc
