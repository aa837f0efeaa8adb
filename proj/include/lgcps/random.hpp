#pragma once

#include <cstdint>
#include <random>

namespace lgcps {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to turn (master seed, stream, index) into
/// well-separated engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based seed derivation:
///   derive_seed(master, stream, index) =
///     splitmix64(splitmix64(master ^ splitmix64(stream)) + index)
/// Every parallel task gets its seed from its index alone, so results do not
/// depend on scheduling or worker count.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

namespace stream {
inline constexpr std::uint64_t kGrf = 1;
inline constexpr std::uint64_t kChain = 2;
inline constexpr std::uint64_t kPilot = 3;
inline constexpr std::uint64_t kRejection = 4;
inline constexpr std::uint64_t kFolds = 5;
inline constexpr std::uint64_t kPredictive = 6;
inline constexpr std::uint64_t kReferenceTable = 7;
inline constexpr std::uint64_t kForest = 8;
inline constexpr std::uint64_t kInitialState = 9;
inline constexpr std::uint64_t kProjections = 10;
}  // namespace stream

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace lgcps
