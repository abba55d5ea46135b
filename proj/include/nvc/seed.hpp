#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace nvc {

using Seed = std::uint64_t;

// SplitMix64 finalizer. Used only to derive independent child seeds and to
// hash tie-break draws; bulk random numbers come from std::mt19937_64.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for a path of integer tags, e.g. derive_seed(master, replicate, k).
// Distinct tag paths give (practically) independent streams.
constexpr Seed derive_seed(Seed seed, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t s = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t t : tags) {
    s = splitmix64(s ^ splitmix64(t + 0x3c6ef372fe94f82bULL));
  }
  return s;
}

// Maps a 64-bit hash onto {0, ..., n-1} by multiply-shift.
constexpr std::size_t bounded_index(std::uint64_t hash, std::size_t n) noexcept {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(hash) * n) >> 64);
}

// Tie-break choice for query row `query` among `n_candidates` equally near
// rows. Shared by the production neighbor search and the test oracles so
// both consume the same stream.
constexpr std::size_t tie_break_pick(Seed seed, std::size_t query, std::size_t n_candidates) noexcept {
  return bounded_index(derive_seed(seed, {0x7469650aULL, query}), n_candidates);
}

}  // namespace nvc
