#include "dual.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "parallel.hpp"
#include "rng.hpp"

namespace swingmc {

SnellSample::SnellSample(int outer_count, int rights, int cemetery)
    : outer_(outer_count),
      rights_(rights),
      dates_(cemetery + 1),
      yhat_(static_cast<std::size_t>(outer_count) * rights * dates_, 0.0),
      e_one_(yhat_.size(), 0.0),
      e_delta_(yhat_.size(), 0.0) {}

SnellView SnellSample::view(int m) const {
    const std::size_t off = static_cast<std::size_t>(m) * rights_ * dates_;
    return {yhat_.data() + off, e_one_.data() + off, e_delta_.data() + off, rights_,
            dates_};
}

SnellSample sample_snell(const ContinuationTable& table, const ContractSpec& spec,
                         const MarketModel& model, const PathSet& outer_paths,
                         int inner_count, const LowerEstimate& lower,
                         std::uint64_t seed) {
    if (inner_count < 1) throw std::invalid_argument("sample_snell: inner_count >= 1");
    if (static_cast<int>(lower.start0.size()) < spec.rights)
        throw std::invalid_argument("sample_snell: lower estimate lacks per-rights values");
    const int L = spec.rights;
    const int T = model.horizon;
    const int pd = model.cemetery();
    const int n3 = outer_paths.count();
    SnellSample snell(n3, L, pd);

    par::parallel_for(n3, [&](std::int64_t mi) {
        const int m = static_cast<int>(mi);
        double* yh = snell.yhat(m);
        double* e1 = snell.e_one(m);
        double* ed = snell.e_delta(m);
        const int dates = pd + 1;
        auto at = [dates](double* base, int l, int j) -> double& {
            return base[(l - 1) * dates + j];
        };

        // Date 0: substitute the non-nested estimates.
        for (int l = 1; l <= L; ++l) {
            at(yh, l, 0) = lower.start0[l - 1];
            at(e1, l, 0) = lower.start_one[l - 1];
            at(ed, l, 0) = lower.start_delta[l - 1];
        }
        // Cemetery: deterministic value of dumping the remaining rights.
        for (int l = 1; l <= L; ++l) {
            at(yh, l, pd) = spec.cemetery_value(l, 0.0);
            at(e1, l, pd) = 0.0;
            at(ed, l, pd) = 0.0;
        }

        std::vector<double> buffer;
        std::vector<double> sums(static_cast<std::size_t>(3 * L));
        PolicyContext ctx;
        for (int j = 1; j <= T; ++j) {
            const double start_price = outer_paths.at(m, j);
            const std::uint64_t inner_seed = rng::derive_stream(
                seed, (static_cast<std::uint64_t>(m) << 32) | static_cast<std::uint64_t>(j));
            const int jd = std::min(spec.refraction(j), pd);
            buffer.resize(static_cast<std::size_t>(pd - j + 1));
            std::fill(sums.begin(), sums.end(), 0.0);
            for (int nu = 0; nu < inner_count; ++nu) {
                fill_inner_path(model, inner_seed, nu, j, start_price, buffer);
                ctx.build(table, spec, PricePath{buffer.data(), j, pd});
                for (int l = 1; l <= L; ++l) {
                    sums[l - 1] += ctx.value(j, l);
                    sums[L + l - 1] += ctx.value(std::min(j + 1, pd), l);
                    sums[2 * L + l - 1] += ctx.value(jd, l);
                }
            }
            const double inv = 1.0 / inner_count;
            for (int l = 1; l <= L; ++l) {
                at(yh, l, j) = sums[l - 1] * inv;
                at(e1, l, j) = sums[L + l - 1] * inv;
                at(ed, l, j) = sums[2 * L + l - 1] * inv;
            }
        }
    });
    return snell;
}

double theta_recursion(const ContractSpec& spec, const SnellView& snell, PricePath path) {
    const int L = spec.rights;
    const int pd = spec.cemetery();
    const int dates = pd + 1;
    // theta[n][i] for n = 0..L, i = 0..cemetery.
    std::vector<double> theta(static_cast<std::size_t>(L + 1) * dates);
    auto th = [&](int n, int i) -> double& {
        return theta[static_cast<std::size_t>(n) * dates + i];
    };
    for (int n = 0; n <= L; ++n) th(n, pd) = spec.cemetery_value(L - n, path.at(pd));
    for (int i = pd - 1; i >= 0; --i) {
        th(L, i) = 0.0;
        const double price = path.at(i);
        const int cap = spec.volume(i, price);
        const int jd = std::min(spec.refraction(i), pd);
        for (int n = L - 1; n >= 0; --n) {
            const int left = L - n;
            double best = th(n, i + 1) + snell.e1(left, i) - snell.y(left, i + 1);
            const int max_nu = std::min(cap, left);
            for (int nu = 1; nu <= max_nu; ++nu) {
                const int rest = left - nu;
                const double cand =
                    spec.immediate_value(left, nu, i, price) +
                    spec.v_product(left, nu, i, price) *
                        (th(n + nu, jd) + snell.ed(rest, i) - snell.y(rest, jd));
                best = std::max(best, cand);
            }
            th(n, i) = best;
        }
    }
    return th(0, 0);
}

double theta_recursion_inputs(const ContractSpec& spec, PricePath path,
                              const std::vector<std::vector<double>>& martingales,
                              const std::vector<std::vector<double>>& refraction_terms) {
    const int L = spec.rights;
    const int pd = spec.cemetery();
    const int dates = pd + 1;
    auto mart = [&](int l, int j) {
        return l >= 1 ? martingales[l - 1][static_cast<std::size_t>(j)] : 0.0;
    };
    auto refr = [&](int l, int j) {
        return l >= 1 ? refraction_terms[l - 1][static_cast<std::size_t>(j)] : 0.0;
    };
    std::vector<double> theta(static_cast<std::size_t>(L + 1) * dates);
    auto th = [&](int n, int i) -> double& {
        return theta[static_cast<std::size_t>(n) * dates + i];
    };
    for (int n = 0; n <= L; ++n) th(n, pd) = spec.cemetery_value(L - n, path.at(pd));
    for (int i = pd - 1; i >= 0; --i) {
        th(L, i) = 0.0;
        const double price = path.at(i);
        const int cap = spec.volume(i, price);
        const int jd = std::min(spec.refraction(i), pd);
        for (int n = L - 1; n >= 0; --n) {
            const int left = L - n;
            double best = th(n, i + 1) - (mart(left, i + 1) - mart(left, i));
            const int max_nu = std::min(cap, left);
            for (int nu = 1; nu <= max_nu; ++nu) {
                const int rest = left - nu;
                const double cand =
                    spec.immediate_value(left, nu, i, price) +
                    spec.v_product(left, nu, i, price) *
                        (th(n + nu, jd) - (mart(rest, jd) - mart(rest, i)) +
                         refr(rest, i));
                best = std::max(best, cand);
            }
            th(n, i) = best;
        }
    }
    return th(0, 0);
}

UpperEstimate upper_bound(const ContractSpec& spec, const SnellSample& snell,
                          const PathSet& outer_paths) {
    const int n3 = outer_paths.count();
    std::vector<double> theta(static_cast<std::size_t>(n3));
    par::parallel_for(n3, [&](std::int64_t m) {
        theta[static_cast<std::size_t>(m)] = theta_recursion(
            spec, snell.view(static_cast<int>(m)), outer_paths.path(static_cast<int>(m)));
    });
    UpperEstimate est;
    est.count = n3;
    double sum = 0.0, sumsq = 0.0;
    for (double t : theta) {
        sum += t;
        sumsq += t * t;
    }
    est.mean = sum / n3;
    if (n3 > 1) {
        const double var = std::max(0.0, (sumsq - n3 * est.mean * est.mean) / (n3 - 1.0));
        est.std_err = std::sqrt(var / n3);
    }
    return est;
}

double corollary_bound(const ContractSpec& spec, const SnellView& snell, PricePath path) {
    const int L = spec.rights;
    const int T = spec.horizon;
    const int pd = spec.cemetery();

    // Running products of the pathwise maxima of V^1..V^k.
    std::vector<double> vmax(static_cast<std::size_t>(L), 1.0);
    if (!spec.additive) {
        for (int l = 1; l <= L - 1; ++l) {
            double mx = 0.0;
            for (int j = path.first_date; j <= pd; ++j)
                mx = std::max(mx, spec.v_eval(l, j, path.at(j)));
            vmax[static_cast<std::size_t>(l)] = vmax[static_cast<std::size_t>(l - 1)] * mx;
        }
    }

    double drift_sum = 0.0;
    for (int r = path.first_date; r <= T - 1; ++r) {
        double best = 0.0;
        for (int k = 0; k < L; ++k) {
            const double defect = snell.e1(L - k, r) - snell.y(L - k, r);
            best = std::max(best, vmax[static_cast<std::size_t>(k)] * std::max(defect, 0.0));
        }
        drift_sum += best;
    }

    double exercise_sum = 0.0;
    for (int k = 1; k <= L; ++k) {
        const int left = L - k + 1;
        double best = 0.0;
        for (int j = path.first_date; j <= pd; ++j) {
            const double price = path.at(j);
            const int cap = std::min(spec.volume(j, price), left);
            double inner = -std::numeric_limits<double>::infinity();
            for (int n = 1; n <= cap; ++n) {
                const int rest = left - n;
                const double cont = j >= pd ? (rest >= 1 ? snell.y(rest, pd) : 0.0)
                                            : snell.ed(rest, j);
                inner = std::max(inner, spec.immediate_value(left, n, j, price) +
                                            spec.v_product(left, n, j, price) * cont);
            }
            best = std::max(best, std::max(inner - snell.y(left, j), 0.0));
        }
        exercise_sum += vmax[static_cast<std::size_t>(k - 1)] * best;
    }
    return drift_sum + exercise_sum;
}

ConfidenceInterval confidence_interval(const LowerEstimate& lower,
                                       const UpperEstimate& upper) {
    return {lower.mean - 1.96 * lower.std_err, upper.mean + 1.96 * upper.std_err};
}

void dump_theta_csv(const ContractSpec& spec, const SnellSample& snell,
                    const PathSet& outer_paths, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "path,theta\n";
    out.precision(17);
    for (int m = 0; m < outer_paths.count(); ++m)
        out << m << ',' << theta_recursion(spec, snell.view(m), outer_paths.path(m))
            << "\n";
}

void dump_snell_csv(const SnellSample& snell, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "path,rights,date,yhat,e_one,e_delta\n";
    out.precision(17);
    for (int m = 0; m < snell.outer_count(); ++m) {
        const SnellView v = snell.view(m);
        for (int l = 1; l <= snell.rights(); ++l)
            for (int j = 0; j < snell.dates(); ++j)
                out << m << ',' << l << ',' << j << ',' << v.y(l, j) << ',' << v.e1(l, j)
                    << ',' << v.ed(l, j) << "\n";
    }
}

}  // namespace swingmc
