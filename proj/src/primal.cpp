#include "primal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "parallel.hpp"

namespace swingmc {

void PolicyContext::build(const ContinuationValues& cont, const ContractSpec& spec,
                          PricePath path) {
    if (spec.rights > 64)
        throw std::invalid_argument("policy: more than 64 rights unsupported");
    spec_ = &spec;
    path_ = path;
    first_ = path.first_date;
    cemetery_ = spec.cemetery();
    max_rights_ = spec.rights;
    const int horizon = spec.horizon;
    const int dates = std::max(0, horizon - first_ + 1);
    exercise_n_.assign(static_cast<std::size_t>(dates) * max_rights_, 0);

    double c_one[64], c_delta[64];
    for (int j = first_; j <= horizon; ++j) {
        const double price = path.at(j);
        cont.eval_all(j, price, max_rights_, c_one, c_delta);
        const int cap = spec.volume(j, price);
        std::uint8_t* row = exercise_n_.data() +
                            static_cast<std::size_t>(j - first_) * max_rights_;
        for (int q = 1; q <= max_rights_; ++q) {
            double best = -std::numeric_limits<double>::infinity();
            int best_n = 0;
            for (int n = 1; n <= std::min(cap, q); ++n) {
                const double cont_val = q - n >= 1 ? c_delta[q - n - 1] : 0.0;
                const double cand = spec.immediate_value(q, n, j, price) +
                                    spec.v_product(q, n, j, price) * cont_val;
                if (cand > best) {
                    best = cand;
                    best_n = n;
                }
            }
            row[q - 1] = best >= c_one[q - 1] ? static_cast<std::uint8_t>(best_n) : 0;
        }
    }
}

template <typename OnExercise>
double PolicyContext::walk(int start_date, int rights, OnExercise&& on_exercise) const {
    if (rights <= 0) return 0.0;
    double payoff = 0.0;
    double v_prefix = 1.0;
    int left = rights;
    int r = std::max(start_date, first_);
    for (;;) {
        if (r >= cemetery_) {
            payoff += v_prefix * spec_->cemetery_value(left, path_.at(cemetery_));
            for (int i = 0; i < left; ++i) on_exercise(cemetery_);
            return payoff;
        }
        const int n = exercise_n_[static_cast<std::size_t>(r - first_) * max_rights_ +
                                  (left - 1)];
        if (n > 0) {
            const double price = path_.at(r);
            payoff += v_prefix * spec_->immediate_value(left, n, r, price);
            v_prefix *= spec_->v_product(left, n, r, price);
            for (int i = 0; i < n; ++i) on_exercise(r);
            left -= n;
            if (left == 0) return payoff;
            r = std::min(spec_->refraction(r), cemetery_);
        } else {
            ++r;
        }
    }
}

double PolicyContext::value(int start_date, int rights) const {
    return walk(start_date, rights, [](int) {});
}

PolicyRun PolicyContext::run(int start_date, int rights) const {
    PolicyRun out;
    out.chain.dates.reserve(rights);
    out.payoff = walk(start_date, rights,
                      [&](int date) { out.chain.dates.push_back(date); });
    return out;
}

PolicyRun run_policy(const ContinuationValues& cont, const ContractSpec& spec,
                     PricePath path, int start_date, int rights, int earliest) {
    if (start_date > spec.cemetery())
        throw std::invalid_argument("run_policy: start_date beyond cemetery");
    PolicyContext ctx;
    ctx.build(cont, spec, path);
    return ctx.run(std::max(start_date, earliest), rights);
}

LowerEstimate lower_bound(const ContinuationTable& table, const ContractSpec& spec,
                          const MarketModel& model, std::int64_t n2, std::uint64_t seed) {
    if (n2 < 1) throw std::invalid_argument("lower_bound: n2 must be >= 1");
    const int L = spec.rights;
    const int pd = model.cemetery();
    const int start_delta_date = std::min(spec.refraction(0), pd);

    constexpr std::int64_t kChunk = 4096;
    const std::int64_t n_chunks = (n2 + kChunk - 1) / kChunk;
    // Per-chunk partial sums: 3L means plus the squared sum of the L-rights
    // date-0 value; folded in chunk order so results do not depend on the
    // worker count.
    const std::size_t width = static_cast<std::size_t>(3 * L + 1);
    std::vector<double> partials(static_cast<std::size_t>(n_chunks) * width, 0.0);

    par::parallel_chunks(n2, kChunk, [&](std::int64_t c, std::int64_t b, std::int64_t e) {
        std::vector<double> buffer(static_cast<std::size_t>(pd + 1));
        PolicyContext ctx;
        double* acc = partials.data() + static_cast<std::size_t>(c) * width;
        for (std::int64_t m = b; m < e; ++m) {
            fill_path(model, seed, m, buffer);
            ctx.build(table, spec, PricePath{buffer.data(), 0, pd});
            for (int l = 1; l <= L; ++l) {
                const double v0 = ctx.value(0, l);
                acc[l - 1] += v0;
                acc[L + l - 1] += ctx.value(1, l);
                acc[2 * L + l - 1] += ctx.value(start_delta_date, l);
                if (l == L) acc[3 * L] += v0 * v0;
            }
        }
    });

    std::vector<double> totals(width, 0.0);
    for (std::int64_t c = 0; c < n_chunks; ++c)
        for (std::size_t i = 0; i < width; ++i)
            totals[i] += partials[static_cast<std::size_t>(c) * width + i];

    LowerEstimate est;
    est.count = n2;
    est.start0.resize(L);
    est.start_one.resize(L);
    est.start_delta.resize(L);
    const double inv_n = 1.0 / static_cast<double>(n2);
    for (int l = 1; l <= L; ++l) {
        est.start0[l - 1] = totals[l - 1] * inv_n;
        est.start_one[l - 1] = totals[L + l - 1] * inv_n;
        est.start_delta[l - 1] = totals[2 * L + l - 1] * inv_n;
    }
    est.mean = est.start0[L - 1];
    if (n2 > 1) {
        const double var =
            std::max(0.0, (totals[3 * L] - n2 * est.mean * est.mean) / (n2 - 1.0));
        est.std_err = std::sqrt(var * inv_n);
    }
    return est;
}

}  // namespace swingmc
