#ifndef UAL_RANDOM_HPP
#define UAL_RANDOM_HPP

#include <cstdint>
#include <random>

namespace ual {

/// The seeded random stream used everywhere in the library.
using Rng = std::mt19937_64;

/// splitmix64 finalizer; mixes (seed, stream) into an independent child seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

}  // namespace ual

#endif  // UAL_RANDOM_HPP
