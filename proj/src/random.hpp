#pragma once

#include <cstdint>
#include <random>

namespace reconf::detail {

// Uniform double in [0, 1) from the top 53 bits, so sequences do not depend
// on the standard library's distribution implementation.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace reconf::detail
