#pragma once

#include <cstdint>
#include <random>

namespace nem {

/// The generator every stochastic routine takes by reference. Callers own
/// one instance per trial; nothing in the library keeps generator state.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive well-separated child seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `stream` of a parent seed.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) noexcept {
  return mix64(parent ^ mix64(stream));
}

/// Standard normal draw via the polar method. libstdc++'s normal_distribution
/// caches a second variate between calls, which makes a draw depend on call
/// history; this one consumes a fixed pattern of engine outputs per call.
double standard_normal(Rng& rng);

/// Uniform draw in [0, 1) with 53 bits of resolution.
double uniform01(Rng& rng);

}  // namespace nem
