#pragma once

#include <cstdint>

namespace rnnfc {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based derivation of independent seeds from one root: the same (root, stream,
/// index) always gives the same seed, whatever order the seeds are requested in.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index = 0) {
    return mix64(mix64(root ^ mix64(stream)) + index);
}

// Stream identifiers.
inline constexpr std::uint64_t kStreamInit = 1;
inline constexpr std::uint64_t kStreamShuffle = 2;
inline constexpr std::uint64_t kStreamNoise = 3;
inline constexpr std::uint64_t kStreamTune = 4;
inline constexpr std::uint64_t kStreamEnsemble = 5;
inline constexpr std::uint64_t kStreamTrial = 6;
inline constexpr std::uint64_t kStreamRidge = 7;

} // namespace rnnfc
