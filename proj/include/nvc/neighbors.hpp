#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "nvc/error.hpp"
#include "nvc/kdtree.hpp"
#include "nvc/matrix.hpp"
#include "nvc/seed.hpp"

namespace nvc {

// n_of[j] is the 0-based index of the Euclidean nearest row to row j among
// all other rows. Exact-distance ties are resolved by tie_break_pick over the
// tied indices in ascending order, so a fixed seed gives a fixed answer.
struct NeighborIndex {
  std::vector<std::uint32_t> n_of;
  Seed tie_seed = 0;
};

// Below this many rows the exhaustive scan beats building a tree.
inline constexpr std::size_t kExhaustiveNeighborThreshold = 64;

namespace detail {

inline void check_predictors(const Matrix& v) {
  if (v.rows() < 2) throw InvalidArgument("nearest_neighbors: need n >= 2 rows");
  if (v.cols() < 1) throw InvalidArgument("nearest_neighbors: need d >= 1 columns");
  if (v.rows() > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("nearest_neighbors: too many rows");
  if (!v.all_finite()) throw InvalidArgument("nearest_neighbors: non-finite predictor value");
}

// `tied` must be sorted ascending.
inline std::uint32_t pick(const std::vector<std::uint32_t>& tied, Seed seed, std::size_t query) {
  if (tied.size() == 1) return tied.front();
  return tied[tie_break_pick(seed, query, tied.size())];
}

inline NeighborIndex neighbors_exhaustive(const Matrix& v, Seed seed) {
  const std::size_t n = v.rows();
  NeighborIndex out{std::vector<std::uint32_t>(n), seed};
  std::vector<std::uint32_t> tied;
  for (std::size_t j = 0; j < n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    tied.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      const double d2 = squared_distance(v.row(j), v.row(i));
      if (d2 < best) {
        best = d2;
        tied.clear();
        tied.push_back(static_cast<std::uint32_t>(i));
      } else if (d2 == best) {
        tied.push_back(static_cast<std::uint32_t>(i));
      }
    }
    out.n_of[j] = pick(tied, seed, j);
  }
  return out;
}

inline NeighborIndex neighbors_kdtree(const Matrix& v, Seed seed) {
  const std::size_t n = v.rows();
  NeighborIndex out{std::vector<std::uint32_t>(n), seed};
  const KdTree tree(v);
  std::vector<std::uint32_t> tied;
  for (std::size_t j = 0; j < n; ++j) {
    tree.nearest_all(j, tied);
    std::sort(tied.begin(), tied.end());
    out.n_of[j] = pick(tied, seed, j);
  }
  return out;
}

// d == 1: sort once, then each row's nearest neighbors sit in the adjacent
// groups of equal values. O(n log n) overall.
inline NeighborIndex neighbors_sorted_1d(const Matrix& v, Seed seed) {
  const std::size_t n = v.rows();
  auto x = [&](std::size_t i) { return v(i, 0); };
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), std::uint32_t{0});
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return x(a) < x(b) || (!(x(b) < x(a)) && a < b);
  });

  // group_begin[g], group_begin[g + 1] delimit runs of equal values in `order`.
  std::vector<std::size_t> group_begin;
  std::vector<std::uint32_t> group_of(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (s == 0 || x(order[s]) != x(order[s - 1])) group_begin.push_back(s);
    group_of[order[s]] = static_cast<std::uint32_t>(group_begin.size() - 1);
  }
  const std::size_t groups = group_begin.size();
  group_begin.push_back(n);
  auto group_value = [&](std::size_t g) { return x(order[group_begin[g]]); };

  NeighborIndex out{std::vector<std::uint32_t>(n), seed};
  std::vector<std::uint32_t> tied;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t g = group_of[j];
    const std::size_t size = group_begin[g + 1] - group_begin[g];
    if (size > 1) {
      // Duplicates at distance 0; the group is already in index order.
      const auto first = order.begin() + static_cast<std::ptrdiff_t>(group_begin[g]);
      const auto last = order.begin() + static_cast<std::ptrdiff_t>(group_begin[g + 1]);
      const std::size_t self = static_cast<std::size_t>(std::lower_bound(first, last, static_cast<std::uint32_t>(j)) - first);
      std::size_t k = tie_break_pick(seed, j, size - 1);
      if (k >= self) ++k;
      out.n_of[j] = *(first + static_cast<std::ptrdiff_t>(k));
      continue;
    }
    const double xj = x(j);
    auto dist = [&](std::size_t h) {
      const double d = xj - group_value(h);
      return d * d;
    };
    double best = std::numeric_limits<double>::infinity();
    if (g > 0) best = std::min(best, dist(g - 1));
    if (g + 1 < groups) best = std::min(best, dist(g + 1));
    tied.clear();
    auto take = [&](std::size_t h) {
      for (std::size_t s = group_begin[h]; s < group_begin[h + 1]; ++s) tied.push_back(order[s]);
    };
    // Rounding can make a farther group's squared distance compare equal,
    // so keep scanning outward while it does.
    std::size_t groups_taken = 0;
    for (std::size_t h = g; h-- > 0 && dist(h) == best;) {
      take(h);
      ++groups_taken;
    }
    for (std::size_t h = g + 1; h < groups && dist(h) == best; ++h) {
      take(h);
      ++groups_taken;
    }
    if (groups_taken > 1) std::sort(tied.begin(), tied.end());
    out.n_of[j] = pick(tied, seed, j);
  }
  return out;
}

}  // namespace detail

inline NeighborIndex nearest_neighbors(const Matrix& v, Seed seed) {
  detail::check_predictors(v);
  if (v.cols() == 1) return detail::neighbors_sorted_1d(v, seed);
  if (v.rows() < kExhaustiveNeighborThreshold) return detail::neighbors_exhaustive(v, seed);
  return detail::neighbors_kdtree(v, seed);
}

}  // namespace nvc
