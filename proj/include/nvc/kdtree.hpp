#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "nvc/matrix.hpp"

namespace nvc {

// Static k-d tree over the rows of a matrix, answering "all rows at minimal
// distance from row j, excluding j itself". Exact ties are kept, which is
// what the randomized tie-break needs; pruning is therefore strict (a
// subtree is skipped only if its bounding plane is farther than the current
// best distance).
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 8;

  explicit KdTree(const Matrix& points) : points_(&points) {
    index_.resize(points.rows());
    std::iota(index_.begin(), index_.end(), std::uint32_t{0});
    nodes_.reserve(2 * points.rows() / kLeafSize + 2);
    build(0, index_.size());
  }

  // Appends to `out` (cleared first) every row index i != query with
  // squared_distance(row(query), row(i)) equal to the minimum. Returns that
  // minimum squared distance.
  double nearest_all(std::size_t query, std::vector<std::uint32_t>& out) const {
    out.clear();
    double best = std::numeric_limits<double>::infinity();
    search(0, query, points_->row(query), best, out);
    return best;
  }

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;  // -1 marks a leaf
    std::int32_t right = -1;
    std::uint32_t dim = 0;
    double split = 0.0;
  };

  std::int32_t build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end)});
    if (end - begin <= kLeafSize) return id;

    const Matrix& m = *points_;
    std::size_t best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t d = 0; d < m.cols(); ++d) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t s = begin; s < end; ++s) {
        const double v = m(index_[s], d);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = d;
      }
    }
    if (best_spread <= 0.0) return id;  // all rows identical: keep as one leaf

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + static_cast<std::ptrdiff_t>(begin), index_.begin() + static_cast<std::ptrdiff_t>(mid),
                     index_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::uint32_t a, std::uint32_t b) { return m(a, best_dim) < m(b, best_dim); });
    const double split = m(index_[mid], best_dim);
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    Node& node = nodes_[static_cast<std::size_t>(id)];
    node.left = left;
    node.right = right;
    node.dim = static_cast<std::uint32_t>(best_dim);
    node.split = split;
    return id;
  }

  void search(std::int32_t id, std::size_t query, std::span<const double> q, double& best,
              std::vector<std::uint32_t>& out) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::uint32_t s = node.begin; s < node.end; ++s) {
        const std::uint32_t i = index_[s];
        if (i == query) continue;
        const double d2 = squared_distance(q, points_->row(i));
        if (d2 < best) {
          best = d2;
          out.clear();
          out.push_back(i);
        } else if (d2 == best) {
          out.push_back(i);
        }
      }
      return;
    }
    const double diff = q[node.dim] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    search(near, query, q, best, out);
    if (diff * diff <= best) search(far, query, q, best, out);
  }

  const Matrix* points_;
  std::vector<std::uint32_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace nvc
