#pragma once

#include <cstdint>
#include <random>

namespace effiscan {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-stream engine keyed by (master seed, stream index). Stream k always
// produces the same draws no matter which order or thread it runs on.
inline std::mt19937_64 substream(std::uint64_t master, std::uint64_t stream) {
    const std::uint64_t s = splitmix64(splitmix64(master) ^ splitmix64(stream + 0x51ed2701ULL));
    return std::mt19937_64(s);
}

}  // namespace effiscan
