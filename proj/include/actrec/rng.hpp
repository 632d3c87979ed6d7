#pragma once

#include <cstdint>
#include <random>

namespace actrec {

using Rng = std::mt19937_64;

/// splitmix64 finalizer. Sub-seeds are derived as mix(master ^ mix(stream)),
/// so each named stream is independent of the order streams are requested in.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream));
}

/// Stable stream ids used across the pipeline.
namespace stream {
inline constexpr std::uint64_t kDae = 1;
inline constexpr std::uint64_t kRegistration = 2;
inline constexpr std::uint64_t kSvm = 3;
inline constexpr std::uint64_t kProtocol = 4;
inline constexpr std::uint64_t kSynthetic = 5;
inline constexpr std::uint64_t kCorruption = 6;
}  // namespace stream

}  // namespace actrec
