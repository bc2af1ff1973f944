#include "model.hpp"

#include <cmath>
#include <stdexcept>

#include "parallel.hpp"
#include "rng.hpp"

namespace swingmc {

namespace {
// Counter layout: c0 = date, c1/c2 = path index, c3 = stream tag.
constexpr std::uint32_t kOuterStream = 0;
constexpr std::uint32_t kInnerStream = 1;

inline double step_log_price(const MarketModel& m, double log_prev, double eps) {
    return (1.0 - m.meanrev) * (log_prev - m.mu) + m.mu + m.sigma * eps;
}
}  // namespace

void MarketModel::validate() const {
    if (sigma < 0.0) throw std::invalid_argument("model: sigma must be >= 0");
    if (s0 <= 0.0) throw std::invalid_argument("model: s0 must be > 0");
    if (horizon < 1) throw std::invalid_argument("model: horizon must be >= 1");
    if (!std::isfinite(sigma) || !std::isfinite(meanrev) || !std::isfinite(mu) ||
        !std::isfinite(s0))
        throw std::invalid_argument("model: parameters must be finite");
}

PathSet::PathSet(int count, int first_date, int horizon, std::uint64_t seed)
    : count_(count),
      first_date_(first_date),
      horizon_(horizon),
      seed_(seed),
      stride_(static_cast<std::size_t>(horizon + 2 - first_date)),
      prices_(static_cast<std::size_t>(count) * stride_) {}

void fill_path(const MarketModel& model, std::uint64_t seed, std::int64_t path_index,
               std::span<double> out) {
    const std::uint32_t lo = static_cast<std::uint32_t>(path_index);
    const std::uint32_t hi = static_cast<std::uint32_t>(path_index >> 32);
    double log_s = std::log(model.s0);
    out[0] = model.s0;
    for (int j = 1; j <= model.horizon; ++j) {
        const double eps =
            rng::normal(seed, static_cast<std::uint32_t>(j), lo, hi, kOuterStream);
        log_s = step_log_price(model, log_s, eps);
        out[static_cast<std::size_t>(j)] = std::exp(log_s);
    }
    out[static_cast<std::size_t>(model.cemetery())] = 0.0;
}

void fill_inner_path(const MarketModel& model, std::uint64_t seed, std::int64_t path_index,
                     int start_date, double start_price, std::span<double> out) {
    const std::uint32_t lo = static_cast<std::uint32_t>(path_index);
    const std::uint32_t hi = static_cast<std::uint32_t>(path_index >> 32);
    double log_s = std::log(start_price);
    out[0] = start_price;
    for (int j = start_date + 1; j <= model.horizon; ++j) {
        const double eps =
            rng::normal(seed, static_cast<std::uint32_t>(j), lo, hi, kInnerStream);
        log_s = step_log_price(model, log_s, eps);
        out[static_cast<std::size_t>(j - start_date)] = std::exp(log_s);
    }
    out[static_cast<std::size_t>(model.cemetery() - start_date)] = 0.0;
}

PathSet simulate_paths(const MarketModel& model, int count, std::uint64_t seed) {
    model.validate();
    if (count < 1) throw std::invalid_argument("simulate_paths: count must be >= 1");
    PathSet paths(count, 0, model.horizon, seed);
    par::parallel_for(count, [&](std::int64_t m) {
        fill_path(model, seed, m, paths.mutable_path(static_cast<int>(m)));
    });
    return paths;
}

PathSet simulate_inner_paths(const MarketModel& model, int start_date,
                             double start_price, int count, std::uint64_t seed) {
    model.validate();
    if (count < 1) throw std::invalid_argument("simulate_inner_paths: count must be >= 1");
    if (start_date < 0 || start_date > model.horizon)
        throw std::invalid_argument("simulate_inner_paths: start_date out of range");
    if (start_price <= 0.0)
        throw std::invalid_argument("simulate_inner_paths: start_price must be > 0");
    PathSet paths(count, start_date, model.horizon, seed);
    for (int m = 0; m < count; ++m) {
        fill_inner_path(model, seed, m, start_date, start_price, paths.mutable_path(m));
    }
    return paths;
}

}  // namespace swingmc
