// Portable helpers on top of std::mt19937_64 (whose output sequence is fixed
// by the standard, unlike the std distributions).
#pragma once

#include <cstdint>
#include <random>

namespace nstraj {

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace nstraj
