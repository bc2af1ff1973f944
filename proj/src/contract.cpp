#include "contract.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swingmc {

namespace {
inline double call_payoff(double price, double strike) {
    return std::max(price - strike, 0.0);
}
}  // namespace

int exercise_count(std::span<const int> chain_prefix) {
    const int last = chain_prefix.back();
    int n = 0;
    for (auto it = chain_prefix.rbegin(); it != chain_prefix.rend() && *it == last; ++it)
        ++n;
    return n;
}

double ContractSpec::immediate_value(int remaining, int n, int j, double price) const {
    const int k = rights - remaining + 1;
    if (additive) return n * u_eval(k, j, price);
    double sum = 0.0;
    double prod = 1.0;
    for (int p = k; p <= k + n - 1; ++p) {
        sum += prod * u_eval(p, j, price);
        if (p < rights) prod *= v_eval(p, j, price);
    }
    return sum;
}

double ContractSpec::v_product(int remaining, int n, int j, double price) const {
    if (additive) return 1.0;
    const int k = rights - remaining + 1;
    double prod = 1.0;
    for (int l = k; l <= k + n - 1; ++l) {
        if (l < rights) prod *= v_eval(l, j, price);
    }
    return prod;
}

double ContractSpec::cemetery_value(int remaining, double cemetery_price) const {
    return immediate_value(remaining, remaining, cemetery(), cemetery_price);
}

bool is_admissible(const ContractSpec& spec, std::span<const int> chain_prefix,
                   std::span<const double> prices_at_dates) {
    int count_at_last = 0;
    for (std::size_t l = 0; l < chain_prefix.size(); ++l) {
        const int date = chain_prefix[l];
        if (date < 0 || date > spec.cemetery()) return false;
        if (l == 0) {
            count_at_last = 1;
        } else {
            const int prev = chain_prefix[l - 1];
            if (date < prev) return false;
            if (date == prev) {
                ++count_at_last;
            } else {
                if (date < spec.refraction(prev)) return false;
                count_at_last = 1;
            }
        }
        if (count_at_last > spec.volume(date, prices_at_dates[l])) return false;
    }
    return true;
}

double chain_payoff(const ContractSpec& spec, const ExerciseChain& chain,
                    std::span<const double> prices_at_dates) {
    double sum = 0.0;
    double prod = 1.0;
    for (std::size_t k = 0; k < chain.dates.size(); ++k) {
        const int p = static_cast<int>(k) + 1;
        sum += prod * spec.u_eval(p, chain.dates[k], prices_at_dates[k]);
        if (p < spec.rights) prod *= spec.v_eval(p, chain.dates[k], prices_at_dates[k]);
    }
    return sum;
}

bool is_weekend(int date) {
    const int d = date % 7;
    return d == 5 || d == 6;
}

namespace {
std::function<int(int, double)> make_volume(VolumeProfile profile, int rights,
                                            int cemetery) {
    if (profile == VolumeProfile::unit) {
        return [rights, cemetery](int j, double) {
            return j >= cemetery ? rights : 1;
        };
    }
    return [rights, cemetery](int j, double) {
        if (j >= cemetery) return rights;
        return is_weekend(j) ? std::min(2, rights) : 1;
    };
}

std::function<int(int)> make_refraction(int delta, int cemetery) {
    return [delta, cemetery](int i) { return std::min(i + delta, cemetery); };
}

void check_common(int rights, int delta, int horizon) {
    if (rights < 1) throw std::invalid_argument("preset: rights must be >= 1");
    if (delta < 1) throw std::invalid_argument("preset: refraction delta must be >= 1");
    if (horizon < 1) throw std::invalid_argument("preset: horizon must be >= 1");
}
}  // namespace

ContractSpec preset_swing(double strike, int rights, VolumeProfile profile, int delta,
                          int horizon) {
    check_common(rights, delta, horizon);
    ContractSpec spec;
    spec.rights = rights;
    spec.strike = strike;
    spec.horizon = horizon;
    spec.additive = true;
    spec.u_eval = [strike](int, int, double price) { return call_payoff(price, strike); };
    spec.v_eval = [](int, int, double) { return 1.0; };
    spec.volume = make_volume(profile, rights, horizon + 1);
    spec.refraction = make_refraction(delta, horizon + 1);
    return spec;
}

ContractSpec preset_exp_utility(double alpha, double strike, int rights,
                                VolumeProfile profile, int delta, int horizon) {
    check_common(rights, delta, horizon);
    if (alpha <= 0.0) throw std::invalid_argument("preset: alpha must be > 0");
    ContractSpec spec;
    spec.rights = rights;
    spec.strike = strike;
    spec.horizon = horizon;
    spec.u_eval = [alpha, strike, rights](int p, int, double price) {
        if (p < rights) return 0.0;
        return -std::exp(-alpha * call_payoff(price, strike));
    };
    spec.v_eval = [alpha, strike](int, int, double price) {
        return std::exp(-alpha * call_payoff(price, strike));
    };
    spec.volume = make_volume(profile, rights, horizon + 1);
    spec.refraction = make_refraction(delta, horizon + 1);
    return spec;
}

ContractSpec preset_liquidation(double impact_a, double impact_b, int rights,
                                int horizon) {
    check_common(rights, 1, horizon);
    if (impact_a <= 0.0 || impact_b <= 0.0)
        throw std::invalid_argument("preset: impact parameters must be > 0");
    if (static_cast<double>(horizon) > 1.0 / impact_a)
        throw std::invalid_argument("preset: liquidation requires horizon <= 1/a");
    ContractSpec spec;
    spec.rights = rights;
    spec.strike = 0.0;
    spec.horizon = horizon;
    const int cemetery = horizon + 1;
    spec.u_eval = [impact_a, impact_b, cemetery](int k, int j, double price) {
        if (j >= cemetery) return 0.0;
        return price * std::exp(impact_b * (impact_a * j - 1.0) * (k - 1));
    };
    spec.v_eval = [impact_a, impact_b, cemetery](int, int j, double) {
        if (j >= cemetery) return 1.0;
        return std::exp(-impact_a * impact_b * j);
    };
    spec.volume = [rights](int, double) { return rights; };
    spec.refraction = make_refraction(1, cemetery);
    return spec;
}

}  // namespace swingmc
