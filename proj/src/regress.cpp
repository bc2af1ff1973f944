#include "regress.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"

namespace swingmc {

BasisSet BasisSet::standard(double strike) {
    BasisSet basis;
    basis.functions.push_back([](double) { return 1.0; });
    basis.functions.push_back([](double x) { return x; });
    basis.functions.push_back([strike](double x) { return std::max(x - strike, 0.0); });
    return basis;
}

void ContinuationValues::eval_all(int j, double price, int max_rights, double* c_one,
                                  double* c_delta) const {
    for (int l = 1; l <= max_rights; ++l) {
        c_one[l - 1] = one_step(j, l, price);
        c_delta[l - 1] = delta_step(j, l, price);
    }
}

ContinuationTable::ContinuationTable(int horizon, int rights, BasisSet basis)
    : horizon_(horizon),
      rights_(rights),
      basis_(std::move(basis)),
      nb_(basis_.size()),
      data_(2ull * (horizon + 1) * rights * nb_, 0.0) {
    if (horizon_ < 1 || rights_ < 1 || nb_ < 1)
        throw std::invalid_argument("continuation table: bad dimensions");
}

double* ContinuationTable::coeffs(StepKind kind, int j, int l) {
    const std::size_t k = kind == StepKind::one ? 0 : 1;
    return data_.data() +
           ((k * (horizon_ + 1) + j) * rights_ + (l - 1)) * static_cast<std::size_t>(nb_);
}

const double* ContinuationTable::coeffs(StepKind kind, int j, int l) const {
    return const_cast<ContinuationTable*>(this)->coeffs(kind, j, l);
}

double ContinuationTable::eval_with_basis(StepKind kind, int j, int l,
                                          const double* basis_values) const {
    if (l <= 0 || j >= horizon_) return 0.0;
    const double* c = coeffs(kind, j, l);
    double acc = 0.0;
    for (int i = 0; i < nb_; ++i) acc += c[i] * basis_values[i];
    return acc;
}

double ContinuationTable::eval(StepKind kind, int j, int l, double price) const {
    if (l <= 0 || j >= horizon_) return 0.0;
    double phi[16];
    std::vector<double> heap;
    double* p = phi;
    if (nb_ > 16) {
        heap.resize(nb_);
        p = heap.data();
    }
    basis_.eval(price, p);
    return eval_with_basis(kind, j, l, p);
}

double ContinuationTable::one_step(int j, int l, double price) const {
    return eval(StepKind::one, j, l, price);
}

double ContinuationTable::delta_step(int j, int l, double price) const {
    return eval(StepKind::delta, j, l, price);
}

void ContinuationTable::eval_all(int j, double price, int max_rights, double* c_one,
                                 double* c_delta) const {
    if (j >= horizon_) {
        std::fill(c_one, c_one + max_rights, 0.0);
        std::fill(c_delta, c_delta + max_rights, 0.0);
        return;
    }
    double phi[16];
    std::vector<double> heap;
    double* p = phi;
    if (nb_ > 16) {
        heap.resize(nb_);
        p = heap.data();
    }
    basis_.eval(price, p);
    for (int l = 1; l <= max_rights; ++l) {
        c_one[l - 1] = eval_with_basis(StepKind::one, j, l, p);
        c_delta[l - 1] = eval_with_basis(StepKind::delta, j, l, p);
    }
}

double eval_continuation(const ContinuationTable& table, StepKind kind, int j, int l,
                         double price) {
    return table.eval(kind, j, l, price);
}

ContinuationTable fit_continuation(const MarketModel& model, const ContractSpec& spec,
                                   const PathSet& paths, const BasisSet& basis,
                                   FitDiagnostics* diagnostics) {
    model.validate();
    if (paths.first_date() != 0 || paths.horizon() != model.horizon ||
        spec.horizon != model.horizon)
        throw std::invalid_argument("fit_continuation: mismatched path horizon");
    if (basis.size() < 1)
        throw std::invalid_argument("fit_continuation: empty basis");
    if (spec.rights > 64)
        throw std::invalid_argument("fit_continuation: more than 64 rights unsupported");

    const int T = model.horizon;
    const int pd = model.cemetery();
    const int L = spec.rights;
    const int N = paths.count();
    const int nb = basis.size();
    const std::size_t date_count = static_cast<std::size_t>(pd + 1);

    // Pathwise dynamic-program values, values[l][j][m]; l = 0 stays zero.
    std::vector<double> values(static_cast<std::size_t>(L + 1) * date_count * N, 0.0);
    auto val = [&](int l, int j) {
        return values.data() + (static_cast<std::size_t>(l) * date_count + j) * N;
    };

    for (int l = 1; l <= L; ++l) {
        const double cem = spec.cemetery_value(l, 0.0);
        std::fill(val(l, pd), val(l, pd) + N, cem);
    }

    // Date T: the continuation rows are pinned to zero, so the pathwise value
    // is the best immediate exercise against a zero continuation.
    par::parallel_for(N, [&](std::int64_t m) {
        const double price = paths.at(static_cast<int>(m), T);
        const int cap = spec.volume(T, price);
        for (int l = 1; l <= L; ++l) {
            double best = 0.0;
            for (int n = 1; n <= std::min(cap, l); ++n)
                best = std::max(best, spec.immediate_value(l, n, T, price));
            val(l, T)[m] = best;
        }
    });

    ContinuationTable table(T, L, basis);

    Eigen::MatrixXd design(N, nb);
    Eigen::MatrixXd targets(N, 2 * L);
    for (int j = T - 1; j >= 0; --j) {
        const int jd = std::min(spec.refraction(j), pd);
        par::parallel_for(N, [&](std::int64_t m) {
            double phi[16];
            std::vector<double> heap;
            double* p = phi;
            if (nb > 16) {
                heap.resize(nb);
                p = heap.data();
            }
            basis.eval(paths.at(static_cast<int>(m), j), p);
            for (int i = 0; i < nb; ++i) design(m, i) = p[i];
            for (int l = 1; l <= L; ++l) {
                targets(m, l - 1) = val(l, j + 1)[m];
                targets(m, L + l - 1) = val(l, jd)[m];
            }
        });

        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
        const Eigen::MatrixXd coeffs = cod.solve(targets);
        for (int l = 1; l <= L; ++l) {
            for (int i = 0; i < nb; ++i) {
                table.coeffs(StepKind::one, j, l)[i] = coeffs(i, l - 1);
                table.coeffs(StepKind::delta, j, l)[i] = coeffs(i, L + l - 1);
            }
        }

        par::parallel_for(N, [&](std::int64_t m) {
            const double price = paths.at(static_cast<int>(m), j);
            double c_one[64], c_delta[64];
            table.eval_all(j, price, L, c_one, c_delta);
            const int cap = spec.volume(j, price);
            for (int l = L; l >= 1; --l) {
                double best = c_one[l - 1];
                for (int n = 1; n <= std::min(cap, l); ++n) {
                    const double cont = l - n >= 1 ? c_delta[l - n - 1] : 0.0;
                    const double cand = spec.immediate_value(l, n, j, price) +
                                        spec.v_product(l, n, j, price) * cont;
                    best = std::max(best, cand);
                }
                val(l, j)[m] = best;
            }
        });
    }

    if (diagnostics) {
        diagnostics->rights = L;
        diagnostics->dates = pd + 1;
        diagnostics->paths = N;
        diagnostics->values = std::move(values);
    }
    return table;
}

std::vector<double> least_squares_coeffs(const BasisSet& basis,
                                         std::span<const double> prices,
                                         std::span<const double> targets) {
    if (prices.size() != targets.size() || prices.empty())
        throw std::invalid_argument("least_squares_coeffs: bad sample sizes");
    const int nb = basis.size();
    Eigen::MatrixXd design(prices.size(), nb);
    std::vector<double> phi(nb);
    for (std::size_t m = 0; m < prices.size(); ++m) {
        basis.eval(prices[m], phi.data());
        for (int i = 0; i < nb; ++i) design(static_cast<Eigen::Index>(m), i) = phi[i];
    }
    Eigen::Map<const Eigen::VectorXd> rhs(targets.data(),
                                          static_cast<Eigen::Index>(targets.size()));
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    const Eigen::VectorXd coeffs = cod.solve(rhs);
    return {coeffs.data(), coeffs.data() + nb};
}

void save_continuation_csv(const ContinuationTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "# continuation horizon=" << table.horizon() << " rights=" << table.rights()
        << " basis=" << table.basis().size() << "\n";
    out << "kind,date,rights";
    for (int i = 0; i < table.basis().size(); ++i) out << ",c" << i;
    out << "\n";
    out.precision(17);
    for (int k = 0; k < 2; ++k) {
        const StepKind kind = k == 0 ? StepKind::one : StepKind::delta;
        for (int j = 0; j <= table.horizon(); ++j) {
            for (int l = 1; l <= table.rights(); ++l) {
                out << (k == 0 ? "one" : "delta") << ',' << j << ',' << l;
                const double* c = table.coeffs(kind, j, l);
                for (int i = 0; i < table.basis().size(); ++i) out << ',' << c[i];
                out << "\n";
            }
        }
    }
}

ContinuationTable load_continuation_csv(const std::string& path, BasisSet basis) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# continuation", 0) != 0)
        throw std::runtime_error("bad continuation file header: " + path);
    int horizon = 0, rights = 0, nb = 0;
    {
        std::istringstream hs(line.substr(std::string("# continuation").size()));
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("horizon=", 0) == 0) horizon = std::stoi(tok.substr(8));
            if (tok.rfind("rights=", 0) == 0) rights = std::stoi(tok.substr(7));
            if (tok.rfind("basis=", 0) == 0) nb = std::stoi(tok.substr(6));
        }
    }
    if (nb != basis.size())
        throw std::runtime_error("continuation file basis size mismatch");
    ContinuationTable table(horizon, rights, std::move(basis));
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        const StepKind kind = cell == "one" ? StepKind::one : StepKind::delta;
        std::getline(ls, cell, ',');
        const int j = std::stoi(cell);
        std::getline(ls, cell, ',');
        const int l = std::stoi(cell);
        double* c = table.coeffs(kind, j, l);
        for (int i = 0; i < nb; ++i) {
            std::getline(ls, cell, ',');
            c[i] = std::stod(cell);
        }
    }
    return table;
}

}  // namespace swingmc
