#pragma once

// Every random stream derives from one 64-bit run seed:
//   stream_seed = splitmix64(run_seed ^ splitmix64(stream_id))
// Stream ids are fixed per use site, so adding a consumer never perturbs the
// others.

#include <cstdint>
#include <random>

namespace fldi {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t stream_id) {
  return splitmix64(run_seed ^ splitmix64(stream_id));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t run_seed, std::uint64_t stream_id) { return Rng(derive_seed(run_seed, stream_id)); }

}  // namespace fldi
