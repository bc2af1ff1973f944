#pragma once

#include <array>
#include <cstdint>

namespace swingmc::rng {

// Philox4x32-10 counter-based generator. Stateless: every (key, counter)
// pair maps to an independent 128-bit block, so simulations keyed by
// (seed, path, date, ...) are reproducible for any thread count.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                        std::uint32_t c0, std::uint32_t c1,
                                        std::uint32_t c2, std::uint32_t c3);

// Uniform draw in the open interval (0, 1) from one Philox block.
double uniform01(std::uint64_t key, std::uint32_t c0, std::uint32_t c1,
                 std::uint32_t c2, std::uint32_t c3);

// Standard normal draw via the inverse-CDF transform of uniform01.
double normal(std::uint64_t key, std::uint32_t c0, std::uint32_t c1,
              std::uint32_t c2, std::uint32_t c3);

// Inverse of the standard normal CDF (Wichura's rational approximation,
// accurate to ~1e-15 over (0,1)).
double normal_quantile(double p);

// Standard normal CDF, used by statistical tests.
double normal_cdf(double x);

// Derives an independent 64-bit stream key from a master seed and a tag.
std::uint64_t derive_stream(std::uint64_t master, std::uint64_t tag);

}  // namespace swingmc::rng
