#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "nvc/error.hpp"
#include "nvc/seed.hpp"

namespace nvc {

using Rank = std::int64_t;

// Rank arrays of a single response U_1..U_n.
//   r[j] = #{j' : U_j' <= U_j}
//   l[j] = #{j' : U_j' >= U_j}
// Both are 1-based counts. Without ties l[j] == n - r[j] + 1.
struct Ranks {
  std::vector<Rank> r;
  std::vector<Rank> l;

  std::size_t size() const noexcept { return r.size(); }
};

// The three arrays entering one evaluation of xi_n: response ranks, the
// L-counts and the response rank at each row's nearest neighbor.
struct RankTriple {
  std::vector<Rank> r;
  std::vector<Rank> l;
  std::vector<Rank> r_nn;

  std::size_t size() const noexcept { return r.size(); }

  void validate() const {
    const auto n = static_cast<Rank>(r.size());
    if (n < 2) throw InvalidArgument("RankTriple: need n >= 2");
    if (l.size() != r.size() || r_nn.size() != r.size()) throw InvalidArgument("RankTriple: array lengths differ");
    auto in_range = [n](Rank v) { return v >= 1 && v <= n; };
    if (!std::all_of(r.begin(), r.end(), in_range) || !std::all_of(l.begin(), l.end(), in_range) ||
        !std::all_of(r_nn.begin(), r_nn.end(), in_range))
      throw InvalidArgument("RankTriple: ranks must lie in {1..n}");
  }
};

inline Ranks compute_ranks(std::span<const double> u) {
  const std::size_t n = u.size();
  if (n < 2) throw InvalidArgument("compute_ranks: need n >= 2");
  for (double v : u)
    if (!std::isfinite(v)) throw InvalidArgument("compute_ranks: non-finite value");

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return u[a] < u[b]; });

  Ranks out;
  out.r.resize(n);
  out.l.resize(n);
  std::size_t begin = 0;
  while (begin < n) {
    std::size_t end = begin + 1;
    while (end < n && u[order[end]] == u[order[begin]]) ++end;
    for (std::size_t s = begin; s < end; ++s) {
      out.r[order[s]] = static_cast<Rank>(end);
      out.l[order[s]] = static_cast<Rank>(n - begin);
    }
    begin = end;
  }
  return out;
}

namespace detail {

// sum_j [n min(R_j, R_N(j)) - L_j^2] and sum_j L_j (n - L_j), exact in
// 128-bit integers.
struct XiSums {
  __int128 numerator = 0;
  __int128 denominator = 0;
};

inline double xi_ratio(const XiSums& s) {
  if (s.denominator == 0) throw DegenerateRanks("xi_n: all response values are tied");
  return static_cast<double>(s.numerator) / static_cast<double>(s.denominator);
}

}  // namespace detail

// The xi_n ratio for a rank triple. Not clamped: small samples can land
// slightly outside [0, 1], and the null distribution relies on that.
inline double xi_from_ranks(const RankTriple& t) {
  t.validate();
  const auto n = static_cast<__int128>(t.size());
  detail::XiSums s;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const __int128 lj = t.l[j];
    s.numerator += n * std::min(t.r[j], t.r_nn[j]) - lj * lj;
    s.denominator += lj * (n - lj);
  }
  return detail::xi_ratio(s);
}

// Null triple from a permutation R0 and with-replacement draws R0_N:
// L0 = n - R0 + 1.
inline RankTriple make_null_triple(std::vector<Rank> r0, std::vector<Rank> r_nn0) {
  RankTriple t;
  const auto n = static_cast<Rank>(r0.size());
  t.l.resize(r0.size());
  for (std::size_t j = 0; j < r0.size(); ++j) t.l[j] = n - r0[j] + 1;
  t.r = std::move(r0);
  t.r_nn = std::move(r_nn0);
  return t;
}

// One draw of xi_n under the permutation-of-ranks null, consuming `engine`.
// `scratch` is reused between calls to avoid reallocating.
inline double xi_null_draw(std::size_t n, std::mt19937_64& engine, std::vector<Rank>& scratch) {
  if (n < 2) throw InvalidArgument("xi_null: need n >= 2");
  scratch.resize(n);
  std::iota(scratch.begin(), scratch.end(), Rank{1});
  std::shuffle(scratch.begin(), scratch.end(), engine);
  std::uniform_int_distribution<Rank> draw(1, static_cast<Rank>(n));
  const auto nn = static_cast<__int128>(n);
  detail::XiSums s;
  for (std::size_t j = 0; j < n; ++j) {
    const Rank r0 = scratch[j];
    const Rank r_nn0 = draw(engine);
    const __int128 l0 = nn - r0 + 1;
    s.numerator += nn * std::min(r0, r_nn0) - l0 * l0;
    s.denominator += l0 * (nn - l0);
  }
  return detail::xi_ratio(s);
}

// xi_n evaluated on a random rank triple: R0 a uniform permutation of
// {1..n}, L0 = n - R0 + 1, and R0_N drawn i.i.d. uniform on {1..n}.
// Depends only on n and the seed.
inline double xi_null(std::size_t n, Seed seed) {
  std::mt19937_64 engine(seed);
  std::vector<Rank> scratch;
  return xi_null_draw(n, engine, scratch);
}

}  // namespace nvc
