#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "nvc/neighbors.hpp"
#include "nvc/ranks.hpp"
#include "nvc/xi.hpp"
#include "oracle.hpp"

using namespace nvc;

namespace {

Matrix column_matrix(const std::vector<double>& v) {
  Matrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

oracle::Rows rows_of(const Matrix& m) {
  oracle::Rows out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) out[i].push_back(m(i, c));
  return out;
}

// Random predictors; with `grid` the values are small integers so exact
// distance ties are common.
Matrix random_matrix(std::size_t n, std::size_t d, std::mt19937_64& eng, bool grid) {
  Matrix m(n, d);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> k(0, 4);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) m(i, c) = grid ? k(eng) : g(eng);
  return m;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& eng, bool grid) {
  std::vector<double> v(n);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> k(0, 9);
  for (auto& x : v) x = grid ? k(eng) : g(eng);
  return v;
}

}  // namespace

TEST(ComputeRanks, DistinctValues) {
  const std::vector<double> u{10, 30, 20};
  const auto r = compute_ranks(u);
  EXPECT_EQ(r.r, (std::vector<Rank>{1, 3, 2}));
  EXPECT_EQ(r.l, (std::vector<Rank>{3, 1, 2}));
}

TEST(ComputeRanks, FullTieCountsSelfAndPeer) {
  const std::vector<double> u{5, 5};
  const auto r = compute_ranks(u);
  EXPECT_EQ(r.r, (std::vector<Rank>{2, 2}));
  EXPECT_EQ(r.l, (std::vector<Rank>{2, 2}));
}

TEST(ComputeRanks, ContinuousSampleIsPermutation) {
  std::mt19937_64 eng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto u = random_vector(1000, eng, false);
    const auto r = compute_ranks(u);
    std::vector<Rank> sorted = r.r;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) ASSERT_EQ(sorted[i], static_cast<Rank>(i + 1));
    for (std::size_t i = 0; i < u.size(); ++i) ASSERT_EQ(r.l[i], 1001 - r.r[i]);
  }
}

TEST(ComputeRanks, MatchesCountingOracleWithTies) {
  std::mt19937_64 eng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const auto u = random_vector(2 + rep * 3, eng, true);
    const auto r = compute_ranks(u);
    const auto o = oracle::ranks(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
      ASSERT_EQ(r.r[i], o.r[i]);
      ASSERT_EQ(r.l[i], o.l[i]);
    }
  }
}

TEST(ComputeRanks, RejectsBadInput) {
  EXPECT_THROW(compute_ranks(std::vector<double>{1.0}), InvalidArgument);
  EXPECT_THROW(compute_ranks(std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(compute_ranks(std::vector<double>{1.0, std::nan("")}), InvalidArgument);
  EXPECT_THROW(compute_ranks(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}), InvalidArgument);
}

TEST(NearestNeighbors, OneDimensionalExample) {
  const auto nn = nearest_neighbors(column_matrix({1, 2, 4}), 0);
  // 0-based: rows 2, 1, 2 in 1-based terms.
  EXPECT_EQ(nn.n_of, (std::vector<std::uint32_t>{1, 0, 1}));
}

TEST(NearestNeighbors, IdenticalRowsPickUniformly) {
  // chi-square over 10^4 seeds, df = 3; 16.27 is the 0.999 quantile.
  for (std::size_t d : {1u, 2u}) {
    Matrix v(5, d);
    std::vector<std::vector<int>> counts(5, std::vector<int>(5, 0));
    for (Seed s = 0; s < 10000; ++s) {
      const auto nn = nearest_neighbors(v, s);
      for (std::size_t j = 0; j < 5; ++j) ++counts[j][nn.n_of[j]];
    }
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_EQ(counts[j][j], 0);
      double chi = 0.0;
      for (std::size_t k = 0; k < 5; ++k) {
        if (k == j) continue;
        chi += std::pow(counts[j][k] - 2500.0, 2) / 2500.0;
      }
      EXPECT_LT(chi, 16.27) << "d=" << d << " j=" << j;
    }
  }
}

TEST(NearestNeighbors, KdTreeMatchesExhaustiveScan) {
  std::mt19937_64 eng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix v = random_matrix(200, 3, eng, rep % 2 == 1);
    const Seed seed = 1000 + rep;
    const auto nn = nearest_neighbors(v, seed);
    const auto ref = oracle::neighbors(rows_of(v), seed);
    for (std::size_t j = 0; j < 200; ++j) ASSERT_EQ(nn.n_of[j], ref[j]) << "rep " << rep << " row " << j;
  }
}

TEST(NearestNeighbors, AllPathsMatchOracle) {
  std::mt19937_64 eng(4);
  for (int rep = 0; rep < 120; ++rep) {
    const std::size_t n = 2 + eng() % 299;
    const std::size_t d = 1 + eng() % 4;
    const Matrix v = random_matrix(n, d, eng, rep % 3 == 0);
    const auto nn = nearest_neighbors(v, rep);
    const auto ref = oracle::neighbors(rows_of(v), rep);
    for (std::size_t j = 0; j < n; ++j) {
      ASSERT_NE(nn.n_of[j], j);
      ASSERT_EQ(nn.n_of[j], ref[j]) << "n=" << n << " d=" << d << " row " << j;
    }
  }
}

TEST(NearestNeighbors, LargeTieGroupsThroughKdTree) {
  Matrix v(100, 2);
  for (std::size_t i = 0; i < 100; ++i) v(i, 0) = static_cast<double>(i % 3);
  const auto nn = nearest_neighbors(v, 9);
  const auto ref = oracle::neighbors(rows_of(v), 9);
  for (std::size_t j = 0; j < 100; ++j) EXPECT_EQ(nn.n_of[j], ref[j]);
}

TEST(NearestNeighbors, DeterministicForSeed) {
  std::mt19937_64 eng(5);
  const Matrix v = random_matrix(150, 2, eng, true);
  EXPECT_EQ(nearest_neighbors(v, 77).n_of, nearest_neighbors(v, 77).n_of);
}

TEST(NearestNeighbors, RejectsBadInput) {
  EXPECT_THROW(nearest_neighbors(Matrix(1, 1), 0), InvalidArgument);
  EXPECT_THROW(nearest_neighbors(Matrix(3, 0), 0), InvalidArgument);
  Matrix v(3, 2);
  v(1, 1) = std::nan("");
  EXPECT_THROW(nearest_neighbors(v, 0), InvalidArgument);
}

TEST(XiFromRanks, HandExamples) {
  EXPECT_EQ(xi_from_ranks({{1, 2, 3}, {3, 2, 1}, {1, 2, 3}}), 1.0);
  EXPECT_EQ(xi_from_ranks({{1, 2, 3}, {3, 2, 1}, {2, 1, 2}}), -0.5);
  EXPECT_EQ(xi_from_ranks({{1, 2, 3, 4}, {4, 3, 2, 1}, {2, 1, 2, 3}}), -0.2);
}

TEST(XiFromRanks, DegenerateWhenAllTied) {
  EXPECT_THROW(xi_from_ranks({{2, 2}, {2, 2}, {2, 2}}), DegenerateRanks);
}

TEST(XiFromRanks, ValidatesTriple) {
  EXPECT_THROW(xi_from_ranks({{1, 2}, {2, 1}, {1}}), InvalidArgument);
  EXPECT_THROW(xi_from_ranks({{1}, {1}, {1}}), InvalidArgument);
  EXPECT_THROW(xi_from_ranks({{1, 3}, {2, 1}, {1, 2}}), InvalidArgument);
  EXPECT_THROW(xi_from_ranks({{1, 2}, {2, 0}, {1, 2}}), InvalidArgument);
}

TEST(XiN, HandExample) {
  EXPECT_EQ(xi_n(std::vector<double>{1, 2, 4, 8}, column_matrix({1, 2, 4, 8}), 0), -0.2);
  const auto t = rank_triple(std::vector<double>{1, 2, 4, 8}, column_matrix({1, 2, 4, 8}), 0);
  EXPECT_EQ(t.r_nn, (std::vector<Rank>{2, 1, 2, 3}));
}

TEST(XiN, StrictlyMonotoneIsNearOne) {
  std::mt19937_64 eng(6);
  const auto v = random_vector(2000, eng, false);
  std::vector<double> u;
  for (double x : v) u.push_back(std::exp(x) + x * x * x);
  EXPECT_GE(xi_n(u, column_matrix(v), 1), 0.95);
}

TEST(XiN, IndependenceIsNearZero) {
  std::mt19937_64 eng(7);
  int within = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const auto u = random_vector(2000, eng, false);
    const auto v = random_vector(2000, eng, false);
    within += std::abs(xi_n(u, column_matrix(v), rep)) <= 0.1;
  }
  EXPECT_GE(within, 475);
}

TEST(XiN, PerfectDependenceBound) {
  for (std::size_t n : {100u, 1000u}) {
    std::vector<double> u(n);
    for (std::size_t j = 0; j < n; ++j) u[j] = static_cast<double>(j + 1);
    EXPECT_GE(xi_n(u, column_matrix(u), 5), 1.0 - 10.0 / static_cast<double>(n)) << n;
  }
}

TEST(XiN, DegenerateResponsePropagates) {
  EXPECT_THROW(xi_n(std::vector<double>{3, 3, 3}, column_matrix({1, 2, 3}), 0), DegenerateRanks);
}

TEST(XiN, LengthMismatch) {
  EXPECT_THROW(xi_n(std::vector<double>{1, 2, 3}, column_matrix({1, 2}), 0), InvalidArgument);
}

TEST(XiN, MonotoneTransformOfResponse) {
  std::mt19937_64 eng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const auto u = random_vector(300, eng, rep % 2 == 0);
    const Matrix v = random_matrix(300, 1 + rep % 3, eng, false);
    std::vector<double> w;
    for (double x : u) w.push_back(std::atan(x) * 3.0 + std::exp(x));
    EXPECT_EQ(xi_n(u, v, rep), xi_n(w, v, rep));
  }
}

TEST(XiN, PositiveAffineMapOfScalarPredictor) {
  std::mt19937_64 eng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const auto u = random_vector(300, eng, false);
    const auto v = random_vector(300, eng, false);
    std::vector<double> a;
    for (double x : v) a.push_back(4.0 * x);
    EXPECT_EQ(xi_n(u, column_matrix(v), rep), xi_n(u, column_matrix(a), rep));
  }
}

TEST(XiN, CommonScaleAndShiftOfPredictors) {
  std::mt19937_64 eng(10);
  for (int rep = 0; rep < 20; ++rep) {
    const auto u = random_vector(250, eng, false);
    Matrix v = random_matrix(250, 3, eng, rep % 2 == 0);
    for (std::size_t i = 0; i < v.rows(); ++i)
      for (std::size_t c = 0; c < v.cols(); ++c) v(i, c) = std::round(v(i, c) * 1024.0) / 1024.0;
    Matrix w = v;
    for (std::size_t i = 0; i < v.rows(); ++i)
      for (std::size_t c = 0; c < v.cols(); ++c) w(i, c) = 2.0 * v(i, c) + 8.0;
    EXPECT_EQ(xi_n(u, v, rep), xi_n(u, w, rep));
  }
}

TEST(XiN, MatchesOracle) {
  std::mt19937_64 eng(13);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 3 + eng() % 298;
    const std::size_t d = 1 + eng() % 4;
    const bool grid = rep % 3 == 0;
    const auto u = random_vector(n, eng, grid);
    const Matrix v = random_matrix(n, d, eng, grid);
    const auto o = oracle::ranks(u);
    if (std::all_of(o.l.begin(), o.l.end(), [&](long long l) { return l == static_cast<long long>(n); })) continue;
    EXPECT_NEAR(xi_n(u, v, rep), oracle::xi(u, rows_of(v), rep), 1e-12) << "n=" << n << " d=" << d;
  }
}

TEST(XiN, DeterministicBits) {
  std::mt19937_64 eng(14);
  const auto u = random_vector(500, eng, true);
  const Matrix v = random_matrix(500, 2, eng, true);
  const double a = xi_n(u, v, 42);
  const double b = xi_n(u, v, 42);
  EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
}

TEST(XiNull, ForcedExample) {
  EXPECT_EQ(xi_from_ranks(make_null_triple({2, 3, 1}, {1, 1, 2})), -1.25);
  const auto t = make_null_triple({2, 3, 1}, {1, 1, 2});
  EXPECT_EQ(t.l, (std::vector<Rank>{2, 1, 3}));
}

TEST(XiNull, CenteredNearZero) {
  for (std::size_t n : {50u, 100u}) {
    std::mt19937_64 eng(n);
    std::vector<Rank> scratch;
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) sum += xi_null_draw(n, eng, scratch);
    const double mean = sum / 100000.0;
    EXPECT_GT(mean, -0.01);
    EXPECT_LT(mean, 0.01);
    if (n == 100) {
      EXPECT_NEAR(mean, 0.0, 0.005);
    }
  }
}

TEST(XiNull, DeterministicAndSeedSensitive) {
  EXPECT_EQ(xi_null(100, 3), xi_null(100, 3));
  EXPECT_NE(xi_null(100, 3), xi_null(100, 4));
  EXPECT_THROW(xi_null(1, 0), InvalidArgument);
}
