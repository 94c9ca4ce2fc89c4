#pragma once

// Seeding helpers. Every stochastic component derives its engine from a
// (seed, stream tag, index) triple so results depend only on those values,
// never on scheduling.

#include <cstdint>
#include <random>

namespace wcr {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ index);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t index = 0) {
    return std::mt19937_64(mix_seed(seed, stream, index));
}

// Fixed stream tags.
namespace stream {
inline constexpr std::uint64_t kGaussian = 0x67617573ULL;   // simulation Brownian draws
inline constexpr std::uint64_t kStable = 0x7374626cULL;     // simulation stable draws
inline constexpr std::uint64_t kInit = 0x696e6974ULL;       // initial condition
inline constexpr std::uint64_t kPerturb = 0x70657274ULL;    // observation noise
inline constexpr std::uint64_t kKernels = 0x6b65726eULL;    // LHS kernel centers
inline constexpr std::uint64_t kResample = 0x72736d70ULL;   // bootstrap resampling
inline constexpr std::uint64_t kEval = 0x6576616cULL;       // evaluation sampling
}  // namespace stream

}  // namespace wcr
