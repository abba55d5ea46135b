#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nvc/error.hpp"
#include "nvc/matrix.hpp"
#include "nvc/seed.hpp"
#include "nvc/xi.hpp"

namespace nvc {

inline constexpr double kDefaultDenominatorEpsilon = 1e-9;
inline constexpr std::size_t kDefaultMaxPermutations = 24;
inline constexpr std::size_t kMaxResponseDim = 63;

// Predictor group x (n x p) and response group y (n x q).
struct FeatureMatrixPair {
  Matrix x;
  Matrix y;

  std::size_t n() const noexcept { return x.rows(); }
  std::size_t p() const noexcept { return x.cols(); }
  std::size_t q() const noexcept { return y.cols(); }

  void validate() const {
    if (x.rows() < 2) throw InvalidArgument("FeatureMatrixPair: need n >= 2");
    if (x.rows() != y.rows()) throw InvalidArgument("FeatureMatrixPair: row counts differ");
    if (x.cols() < 1 || y.cols() < 1) throw InvalidArgument("FeatureMatrixPair: need p, q >= 1");
    if (y.cols() > kMaxResponseDim || x.cols() > kMaxResponseDim)
      throw InvalidArgument("FeatureMatrixPair: at most 63 columns per group");
    if (!x.all_finite() || !y.all_finite()) throw InvalidArgument("FeatureMatrixPair: non-finite entry");
  }

  FeatureMatrixPair swapped() const { return {y, x}; }
};

enum class PlanMode { Exhaustive, Sampled };

struct PermutationPlan {
  std::size_t q = 0;
  std::vector<std::vector<std::uint32_t>> perms;
  PlanMode mode = PlanMode::Exhaustive;
  Seed seed = 0;

  std::size_t size() const noexcept { return perms.size(); }
};

inline std::size_t factorial_capped(std::size_t q, std::size_t cap) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= q; ++i) {
    if (f > cap / i) return cap + 1;
    f *= i;
  }
  return f;
}

// All q! permutations in lexicographic order.
inline PermutationPlan exhaustive_plan(std::size_t q) {
  if (q < 1) throw InvalidArgument("exhaustive_plan: q >= 1 required");
  if (factorial_capped(q, 40320) > 40320) throw InvalidArgument("exhaustive_plan: q! too large to enumerate");
  PermutationPlan plan{q, {}, PlanMode::Exhaustive, 0};
  std::vector<std::uint32_t> perm(q);
  std::iota(perm.begin(), perm.end(), 0u);
  do plan.perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  return plan;
}

// Q distinct permutations drawn uniformly without replacement. The mode is
// Exhaustive exactly when Q == q!.
inline PermutationPlan sampled_plan(std::size_t q, std::size_t count, Seed seed) {
  if (q < 1) throw InvalidArgument("sampled_plan: q >= 1 required");
  const std::size_t total = factorial_capped(q, std::size_t{1} << 40);
  if (count < 1 || count > total) throw InvalidArgument("sampled_plan: need 1 <= Q <= q!");
  std::mt19937_64 engine(seed);
  PermutationPlan plan{q, {}, count == total ? PlanMode::Exhaustive : PlanMode::Sampled, seed};
  if (total <= 40320) {
    PermutationPlan all = exhaustive_plan(q);
    std::shuffle(all.perms.begin(), all.perms.end(), engine);
    all.perms.resize(count);
    plan.perms = std::move(all.perms);
    return plan;
  }
  std::set<std::vector<std::uint32_t>> seen;
  std::vector<std::uint32_t> perm(q);
  std::iota(perm.begin(), perm.end(), 0u);
  while (plan.perms.size() < count) {
    std::shuffle(perm.begin(), perm.end(), engine);
    if (seen.insert(perm).second) plan.perms.push_back(perm);
  }
  return plan;
}

// Exhaustive when q! <= max_perms, otherwise max_perms sampled permutations.
inline PermutationPlan default_plan(std::size_t q, Seed seed, std::size_t max_perms = kDefaultMaxPermutations) {
  if (factorial_capped(q, max_perms) <= max_perms) return exhaustive_plan(q);
  return sampled_plan(q, max_perms, seed);
}

enum class Measure { T, TBar, TStar };

inline std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::T: return "t";
    case Measure::TBar: return "tbar";
    case Measure::TStar: return "tstar";
  }
  return "?";
}

inline Measure parse_measure(std::string_view s) {
  if (s == "t") return Measure::T;
  if (s == "tbar") return Measure::TBar;
  if (s == "tstar") return Measure::TStar;
  throw InvalidArgument("unknown measure '" + std::string(s) + "' (expected t, tbar or tstar)");
}

struct MeasureOptions {
  double denominator_epsilon = kDefaultDenominatorEpsilon;
};

// Seed of the xi_n sub-call for response column `column` against predictor
// columns `mask` of y, with or without the x group. Keying by the term
// rather than by position makes every permutation that reaches the same
// term reuse the same tie-break stream. Terms conditioning on x alone use
// the master seed, so q == 1 reproduces xi_n(y ; x, seed) bit for bit.
inline Seed term_seed(Seed seed, bool with_x, std::size_t column, std::uint64_t mask) {
  if (with_x && mask == 0) return seed;
  return derive_seed(seed, {with_x ? 1u : 0u, column, mask});
}

namespace detail {

// Evaluates T_n over orderings of y's columns, caching each distinct
// xi_n(y_c ; x?, y_S) term.
class SequentialDependence {
 public:
  SequentialDependence(const FeatureMatrixPair& pair, Seed seed, MeasureOptions opts)
      : pair_(pair), seed_(seed), opts_(opts) {
    pair.validate();
    x_cols_.reserve(pair.p());
    for (std::size_t c = 0; c < pair.p(); ++c) x_cols_.push_back(pair.x.column(c));
    y_cols_.reserve(pair.q());
    for (std::size_t c = 0; c < pair.q(); ++c) y_cols_.push_back(pair.y.column(c));
    ranks_.resize(pair.q());
  }

  double evaluate(std::span<const std::uint32_t> order) {
    const std::size_t q = y_cols_.size();
    if (order.size() != q) throw InvalidArgument("T_n: permutation length differs from q");
    double numerator_sum = 0.0;
    double denominator_sum = 0.0;
    std::uint64_t mask = 0;
    for (std::size_t step = 0; step < q; ++step) {
      const std::uint32_t c = order[step];
      numerator_sum += term(c, mask, true);
      if (step > 0) denominator_sum += term(c, mask, false);
      mask |= std::uint64_t{1} << c;
    }
    const double denominator = static_cast<double>(q) - denominator_sum;
    if (!(denominator > opts_.denominator_epsilon))
      throw DegenerateDenominator("T_n: denominator " + std::to_string(denominator) +
                                  " <= epsilon; response components are functionally dependent");
    // 1 - (q - A) / (q - D), rearranged so q == 1 returns xi_n unchanged.
    return (numerator_sum - denominator_sum) / denominator;
  }

 private:
  double term(std::uint32_t column, std::uint64_t mask, bool with_x) {
    const auto key = std::make_tuple(column, mask, with_x);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (!ranks_[column]) ranks_[column] = compute_ranks(y_cols_[column]);
    std::vector<std::span<const double>> predictors;
    if (with_x)
      for (const auto& col : x_cols_) predictors.emplace_back(col);
    for (std::size_t c = 0; c < y_cols_.size(); ++c)
      if (mask & (std::uint64_t{1} << c)) predictors.emplace_back(y_cols_[c]);
    const Matrix v = Matrix::from_columns(std::span<const std::span<const double>>(predictors));
    const double value = xi_with_ranks(*ranks_[column], v, term_seed(seed_, with_x, column, mask));
    cache_.emplace(key, value);
    return value;
  }

  const FeatureMatrixPair& pair_;
  Seed seed_;
  MeasureOptions opts_;
  std::vector<std::vector<double>> x_cols_;
  std::vector<std::vector<double>> y_cols_;
  std::vector<std::optional<Ranks>> ranks_;
  std::map<std::tuple<std::uint32_t, std::uint64_t, bool>, double> cache_;
};

}  // namespace detail

// Rank-based estimate of T(y ; x): 1 - [q - sum_l xi_n(y_l ; x, y_1..y_{l-1})]
//                                    / [q - sum_{l>=2} xi_n(y_l ; y_1..y_{l-1})].
inline double t_n(const FeatureMatrixPair& pair, Seed seed, MeasureOptions opts = {}) {
  detail::SequentialDependence seq(pair, seed, opts);
  std::vector<std::uint32_t> identity(pair.q());
  std::iota(identity.begin(), identity.end(), 0u);
  return seq.evaluate(identity);
}

// Mean of T_n over the plan's column orderings of y.
inline double t_n_bar(const FeatureMatrixPair& pair, const PermutationPlan& plan, Seed seed, MeasureOptions opts = {}) {
  if (plan.q != pair.q() || plan.perms.empty()) throw InvalidArgument("t_n_bar: plan does not match q");
  detail::SequentialDependence seq(pair, seed, opts);
  double sum = 0.0;
  for (const auto& perm : plan.perms) sum += seq.evaluate(perm);
  return sum / static_cast<double>(plan.perms.size());
}

// max{ Tbar(y ; x), Tbar(x ; y) }. Both directions share the seed so that
// exchanging the groups (and their plans) gives the identical value.
inline double t_n_star(const FeatureMatrixPair& pair, const PermutationPlan& plan_x, const PermutationPlan& plan_y, Seed seed,
                       MeasureOptions opts = {}) {
  const double forward = t_n_bar(pair, plan_y, seed, opts);
  const double backward = t_n_bar(pair.swapped(), plan_x, seed, opts);
  return std::max(forward, backward);
}

// Plans for both groups of a (p, q) problem, derived from one seed.
struct PlanPair {
  PermutationPlan x;
  PermutationPlan y;
};

inline PlanPair default_plans(std::size_t p, std::size_t q, Seed seed, std::size_t max_perms = kDefaultMaxPermutations) {
  return {default_plan(p, derive_seed(seed, {0x706c616eULL, p}), max_perms),
          default_plan(q, derive_seed(seed, {0x706c616eULL, q}), max_perms)};
}

inline double evaluate_measure(const FeatureMatrixPair& pair, Measure measure, const PlanPair& plans, Seed seed,
                               MeasureOptions opts = {}) {
  switch (measure) {
    case Measure::T: return t_n(pair, seed, opts);
    case Measure::TBar: return t_n_bar(pair, plans.y, seed, opts);
    case Measure::TStar: return t_n_star(pair, plans.x, plans.y, seed, opts);
  }
  throw InvalidArgument("evaluate_measure: unknown measure");
}

}  // namespace nvc
