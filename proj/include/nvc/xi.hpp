#pragma once

#include <span>

#include "nvc/matrix.hpp"
#include "nvc/neighbors.hpp"
#include "nvc/ranks.hpp"

namespace nvc {

// xi_n for a response whose ranks are already known. Lets callers that
// reuse one response against several predictor sets rank it once.
inline double xi_with_ranks(const Ranks& ranks, const Matrix& v, Seed seed) {
  if (v.rows() != ranks.size()) throw InvalidArgument("xi_n: response and predictor lengths differ");
  const NeighborIndex nn = nearest_neighbors(v, seed);
  const auto n = static_cast<__int128>(ranks.size());
  detail::XiSums s;
  for (std::size_t j = 0; j < ranks.size(); ++j) {
    const __int128 lj = ranks.l[j];
    s.numerator += n * std::min(ranks.r[j], ranks.r[nn.n_of[j]]) - lj * lj;
    s.denominator += lj * (n - lj);
  }
  return detail::xi_ratio(s);
}

// Rank triple assembled from data: ranks of u plus the rank of u at each
// row's nearest neighbor in v.
inline RankTriple rank_triple(std::span<const double> u, const Matrix& v, Seed seed) {
  if (v.rows() != u.size()) throw InvalidArgument("xi_n: response and predictor lengths differ");
  Ranks ranks = compute_ranks(u);
  const NeighborIndex nn = nearest_neighbors(v, seed);
  RankTriple t;
  t.r_nn.resize(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) t.r_nn[j] = ranks.r[nn.n_of[j]];
  t.r = std::move(ranks.r);
  t.l = std::move(ranks.l);
  return t;
}

// Azadkia-Chatterjee-type coefficient of functional dependence of u on v.
// O(n log n) for d == 1, expected O(n log n) through the k-d tree otherwise.
inline double xi_n(std::span<const double> u, const Matrix& v, Seed seed) {
  return xi_with_ranks(compute_ranks(u), v, seed);
}

}  // namespace nvc
