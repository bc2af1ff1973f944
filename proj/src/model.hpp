#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace swingmc {

// Discretized exponential Gaussian Ornstein-Uhlenbeck spot model:
//   log S_j = (1 - meanrev) * (log S_{j-1} - mu) + mu + sigma * eps_j,
// on dates j = 0..horizon, with an extra cemetery date horizon+1 at which the
// price is identically 0 (unused rights expire worthless there).
struct MarketModel {
    double sigma = 0.5;
    double meanrev = 0.9;
    double mu = 0.0;
    double s0 = 1.0;
    int horizon = 50;

    int cemetery() const { return horizon + 1; }

    // Throws std::invalid_argument on violated parameter constraints.
    void validate() const;
};

// A lightweight non-owning view of one price trajectory covering the dates
// first_date..cemetery (inclusive).
struct PricePath {
    const double* prices = nullptr;
    int first_date = 0;
    int last_date = 0;

    double at(int date) const { return prices[date - first_date]; }
};

// A set of simulated trajectories. Immutable after construction and safe to
// share across threads. Fixed (seed, count) reproduce bit-identical values
// for any worker count.
class PathSet {
public:
    PathSet(int count, int first_date, int horizon, std::uint64_t seed);

    int count() const { return count_; }
    int first_date() const { return first_date_; }
    int horizon() const { return horizon_; }
    int cemetery() const { return horizon_ + 1; }
    std::uint64_t seed() const { return seed_; }

    double at(int path, int date) const {
        return prices_[static_cast<std::size_t>(path) * stride_ + (date - first_date_)];
    }
    PricePath path(int m) const {
        return {prices_.data() + static_cast<std::size_t>(m) * stride_, first_date_,
                horizon_ + 1};
    }
    std::span<double> mutable_path(int m) {
        return {prices_.data() + static_cast<std::size_t>(m) * stride_, stride_};
    }

private:
    int count_;
    int first_date_;
    int horizon_;
    std::uint64_t seed_;
    std::size_t stride_;
    std::vector<double> prices_;
};

// Fills one trajectory of `model` into `out` (dates 0..cemetery). Row m of
// simulate_paths(model, n, seed) equals fill_path(model, seed, m, ...) for
// every n > m; streaming consumers rely on this.
void fill_path(const MarketModel& model, std::uint64_t seed, std::int64_t path_index,
               std::span<double> out);

// Simulates `count` independent trajectories started at S_0 = s0.
PathSet simulate_paths(const MarketModel& model, int count, std::uint64_t seed);

// Simulates trajectories over dates start_date..cemetery under the
// conditional law given S_{start_date} = start_price. The model is Markov,
// so no further history is needed.
PathSet simulate_inner_paths(const MarketModel& model, int start_date,
                             double start_price, int count, std::uint64_t seed);

void fill_inner_path(const MarketModel& model, std::uint64_t seed, std::int64_t path_index,
                     int start_date, double start_price, std::span<double> out);

}  // namespace swingmc
