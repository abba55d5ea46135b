#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <span>
#include <tuple>
#include <vector>

#include "nvc/error.hpp"
#include "nvc/parallel.hpp"
#include "nvc/ranks.hpp"
#include "nvc/seed.hpp"
#include "nvc/vector_measure.hpp"

namespace nvc {

inline constexpr std::size_t kDefaultNullReplicates = 2000;
inline constexpr std::size_t kDefaultGroupPermutations = 5000;
inline constexpr std::size_t kRedrawFactor = 10;

// Replicates of the NVC statistic under spectral independence, generated by
// the permutation-of-ranks device. Contains no data: it is a function of
// (n, layout, R, seed) only, so one ensemble serves every frequency.
struct NullEnsemble {
  std::size_t n = 0;
  std::size_t p = 0;  // 0 for the plain T_n layout, which ignores p
  std::size_t q = 0;
  Measure measure = Measure::T;
  Seed seed = 0;
  std::vector<double> reps;
  std::size_t redraws = 0;

  std::size_t size() const noexcept { return reps.size(); }

  // Sorted copy for O(log R) p-value lookups.
  std::vector<double> sorted;

  void finalize() {
    sorted = reps;
    std::sort(sorted.begin(), sorted.end());
  }
};

namespace detail {

// Draws replicates in parallel; replicate r uses seeds derived from
// (seed, r, attempt) so the result is independent of scheduling. A draw
// returning nullopt is degenerate and redrawn.
template <class Draw>
void fill_null(NullEnsemble& ens, std::size_t replicates, std::size_t threads, Draw&& draw) {
  if (replicates < 1) throw InvalidArgument("null_ensemble: need R >= 1");
  ens.reps.assign(replicates, 0.0);
  std::vector<std::size_t> attempts(replicates, 0);
  std::atomic<std::size_t> total_redraws{0};
  const std::size_t cap = kRedrawFactor * replicates;
  parallel_for(replicates, threads, [&](std::size_t r) {
    std::vector<Rank> scratch;
    for (std::size_t attempt = 0;; ++attempt) {
      std::mt19937_64 engine(derive_seed(ens.seed, {r, attempt}));
      if (auto v = draw(engine, scratch)) {
        ens.reps[r] = *v;
        attempts[r] = attempt;
        return;
      }
      if (total_redraws.fetch_add(1) + 1 > cap)
        throw NumericalError("null_ensemble: more than 10 x R degenerate replicates");
    }
  });
  ens.redraws = std::accumulate(attempts.begin(), attempts.end(), std::size_t{0});
  ens.finalize();
}

}  // namespace detail

// Null of T_n: T^(r) = 1 - [q - sum of q xi0 draws] / [q - sum of (q-1) xi0
// draws], every xi0 an independent permutation-of-ranks draw at sample size n.
inline NullEnsemble null_ensemble(std::size_t n, std::size_t q, std::size_t replicates, Seed seed,
                                  std::size_t threads = 1, double epsilon = kDefaultDenominatorEpsilon) {
  if (n < 2) throw InvalidArgument("null_ensemble: need n >= 2");
  if (q < 1) throw InvalidArgument("null_ensemble: need q >= 1");
  NullEnsemble ens{n, 0, q, Measure::T, seed, {}, 0, {}};
  detail::fill_null(ens, replicates, threads, [&](std::mt19937_64& engine, std::vector<Rank>& scratch) -> std::optional<double> {
    double numerator_sum = 0.0;
    for (std::size_t l = 0; l < q; ++l) numerator_sum += xi_null_draw(n, engine, scratch);
    double denominator_sum = 0.0;
    for (std::size_t l = 1; l < q; ++l) denominator_sum += xi_null_draw(n, engine, scratch);
    const double denominator = static_cast<double>(q) - denominator_sum;
    if (!(denominator > epsilon)) return std::nullopt;
    return (numerator_sum - denominator_sum) / denominator;
  });
  return ens;
}

// Term structure of Tbar / T* for given plans: which distinct
// xi_n(response ; predictor set) terms each permutation's numerator and
// denominator uses. Each distinct term receives its own xi0 draw per
// replicate, mirroring how the statistic itself reuses terms across
// permutations.
struct NullLayout {
  struct Ordering {
    std::vector<std::size_t> numerator_terms;
    std::vector<std::size_t> denominator_terms;
    std::size_t dim = 0;
  };
  std::size_t term_count = 0;
  std::vector<Ordering> forward;   // orderings of y given x
  std::vector<Ordering> backward;  // orderings of x given y (T* only)

  static NullLayout build(Measure measure, std::size_t p, std::size_t q, const PlanPair& plans) {
    NullLayout layout;
    std::map<std::tuple<int, std::uint32_t, std::uint64_t, bool>, std::size_t> ids;
    auto id_of = [&](int dir, std::uint32_t col, std::uint64_t mask, bool with_x) {
      auto [it, inserted] = ids.try_emplace(std::make_tuple(dir, col, mask, with_x), ids.size());
      return it->second;
    };
    auto add = [&](int dir, const PermutationPlan& plan, std::vector<Ordering>& dest) {
      for (const auto& perm : plan.perms) {
        Ordering o;
        o.dim = perm.size();
        std::uint64_t mask = 0;
        for (std::size_t step = 0; step < perm.size(); ++step) {
          o.numerator_terms.push_back(id_of(dir, perm[step], mask, true));
          if (step > 0) o.denominator_terms.push_back(id_of(dir, perm[step], mask, false));
          mask |= std::uint64_t{1} << perm[step];
        }
        dest.push_back(std::move(o));
      }
    };
    if (plans.y.q != q || plans.x.q != p) throw InvalidArgument("NullLayout: plans do not match (p, q)");
    if (measure == Measure::T) {
      PermutationPlan identity{q, {std::vector<std::uint32_t>(q)}, PlanMode::Sampled, 0};
      std::iota(identity.perms[0].begin(), identity.perms[0].end(), 0u);
      add(0, identity, layout.forward);
    } else {
      add(0, plans.y, layout.forward);
      if (measure == Measure::TStar) add(1, plans.x, layout.backward);
    }
    layout.term_count = ids.size();
    return layout;
  }
};

// Null ensemble matching the statistic `measure` computes. For Measure::T
// this is exactly null_ensemble(n, q, R, seed).
inline NullEnsemble null_ensemble(std::size_t n, Measure measure, std::size_t p, std::size_t q, const PlanPair& plans,
                                  std::size_t replicates, Seed seed, std::size_t threads = 1,
                                  double epsilon = kDefaultDenominatorEpsilon) {
  if (measure == Measure::T) return null_ensemble(n, q, replicates, seed, threads, epsilon);
  if (n < 2) throw InvalidArgument("null_ensemble: need n >= 2");
  const NullLayout layout = NullLayout::build(measure, p, q, plans);
  NullEnsemble ens{n, p, q, measure, seed, {}, 0, {}};
  detail::fill_null(ens, replicates, threads, [&](std::mt19937_64& engine, std::vector<Rank>& scratch) -> std::optional<double> {
    std::vector<double> xi0(layout.term_count);
    for (double& v : xi0) v = xi_null_draw(n, engine, scratch);
    auto mean_over = [&](const std::vector<NullLayout::Ordering>& orderings) -> std::optional<double> {
      double sum = 0.0;
      for (const auto& o : orderings) {
        double a = 0.0;
        double d = 0.0;
        for (std::size_t t : o.numerator_terms) a += xi0[t];
        for (std::size_t t : o.denominator_terms) d += xi0[t];
        const double denominator = static_cast<double>(o.dim) - d;
        if (!(denominator > epsilon)) return std::nullopt;
        sum += (a - d) / denominator;
      }
      return sum / static_cast<double>(orderings.size());
    };
    auto forward = mean_over(layout.forward);
    if (!forward) return std::nullopt;
    if (layout.backward.empty()) return forward;
    auto backward = mean_over(layout.backward);
    if (!backward) return std::nullopt;
    return std::max(*forward, *backward);
  });
  return ens;
}

// Add-one smoothed upper-tail p-value (1 + #{T^(r) >= t}) / (R + 1), always
// in (0, 1]. NaN statistics give NaN.
inline double p_value(double statistic, const NullEnsemble& ens) {
  if (ens.sorted.size() != ens.reps.size()) throw InvalidArgument("p_value: ensemble not finalized");
  if (std::isnan(statistic)) return std::numeric_limits<double>::quiet_NaN();
  const auto first_ge = std::lower_bound(ens.sorted.begin(), ens.sorted.end(), statistic);
  const auto at_least = static_cast<double>(ens.sorted.end() - first_ge);
  return (1.0 + at_least) / (static_cast<double>(ens.sorted.size()) + 1.0);
}

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t replicates = 0;
  bool reject = false;  // p_value < alpha
};

inline TestResult decide(double statistic, double p, std::size_t replicates, double alpha) {
  return {statistic, p, replicates, p < alpha};
}

// Benjamini-Hochberg step-up adjusted p-values, in input order. NaN entries
// are passed through and excluded from the family.
inline std::vector<double> bh_adjust(std::span<const double> p) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::isnan(p[i])) continue;
    if (!(p[i] > 0.0 && p[i] <= 1.0)) throw InvalidArgument("bh_adjust: p-values must lie in (0, 1]");
    order.push_back(i);
  }
  std::vector<double> out(p.begin(), p.end());
  const std::size_t m = order.size();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  double running = 1.0;
  for (std::size_t rank = m; rank-- > 0;) {
    const std::size_t i = order[rank];
    // p * m / rank, with the top rank taken as p itself so p * m / m cannot drift by an ulp.
    const double scaled = rank + 1 == m ? p[i] : p[i] * static_cast<double>(m) / static_cast<double>(rank + 1);
    running = std::min(running, std::max(p[i], scaled));
    out[i] = std::min(running, 1.0);
  }
  return out;
}

enum class GroupStatistic { MeanDifference, WelchT };

namespace detail {

inline double group_statistic(std::span<const double> g1, std::span<const double> g2, GroupStatistic kind) {
  auto mean = [](std::span<const double> g) {
    double s = 0.0;
    for (double v : g) s += v;
    return s / static_cast<double>(g.size());
  };
  const double m1 = mean(g1);
  const double m2 = mean(g2);
  if (kind == GroupStatistic::MeanDifference) return std::abs(m1 - m2);
  auto var = [](std::span<const double> g, double m) {
    double ss = 0.0;
    for (double v : g) ss += (v - m) * (v - m);
    return ss / static_cast<double>(g.size() - 1);
  };
  const double se2 = var(g1, m1) / static_cast<double>(g1.size()) + var(g2, m2) / static_cast<double>(g2.size());
  if (se2 <= 0.0) return m1 == m2 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(m1 - m2) / std::sqrt(se2);
}

}  // namespace detail

// Two-sided label-permutation test of equal distributions. The pooled
// sample is sorted before shuffling and the smaller group is always drawn
// first, so exchanging a and b gives the identical p-value.
inline TestResult group_permutation_test(std::span<const double> a, std::span<const double> b,
                                         std::size_t permutations, Seed seed, double alpha = 0.05,
                                         GroupStatistic kind = GroupStatistic::MeanDifference) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("group_permutation_test: need >= 2 subjects per group");
  if (permutations < 1) throw InvalidArgument("group_permutation_test: need R_g >= 1");
  for (double v : a)
    if (!std::isfinite(v)) throw InvalidArgument("group_permutation_test: non-finite value");
  for (double v : b)
    if (!std::isfinite(v)) throw InvalidArgument("group_permutation_test: non-finite value");
  const double observed = a.size() <= b.size() ? detail::group_statistic(a, b, kind) : detail::group_statistic(b, a, kind);
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  const std::size_t first = std::min(a.size(), b.size());
  const double tolerance = 1e-12 * std::max(1.0, std::abs(observed));
  std::mt19937_64 engine(seed);
  std::size_t at_least = 0;
  for (std::size_t r = 0; r < permutations; ++r) {
    std::shuffle(pooled.begin(), pooled.end(), engine);
    const std::span<const double> all(pooled);
    const double s = detail::group_statistic(all.first(first), all.subspan(first), kind);
    if (s >= observed - tolerance) ++at_least;
  }
  const double p = (1.0 + static_cast<double>(at_least)) / (static_cast<double>(permutations) + 1.0);
  return decide(observed, p, permutations, alpha);
}

// One ensemble per (n, measure, p, q); counts hits so callers can verify
// reuse across frequencies and region pairs.
class NullEnsembleCache {
 public:
  NullEnsembleCache(std::size_t replicates, Seed seed, std::size_t threads = 1)
      : replicates_(replicates), seed_(seed), threads_(threads) {}

  const NullEnsemble& get(std::size_t n, Measure measure, std::size_t p, std::size_t q, const PlanPair& plans) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(n, measure, measure == Measure::T ? std::size_t{0} : p, q);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
    ++misses_;
    auto [it, _] = cache_.emplace(key, null_ensemble(n, measure, p, q, plans, replicates_, ensemble_seed(n, measure, p, q), threads_));
    return it->second;
  }

  Seed ensemble_seed(std::size_t n, Measure measure, std::size_t p, std::size_t q) const {
    if (measure == Measure::T) p = 0;
    return derive_seed(seed_, {0x6e756c6cULL, n, static_cast<std::uint64_t>(measure), p, q});
  }

  std::size_t hits() const noexcept { return hits_; }
  std::size_t misses() const noexcept { return misses_; }
  std::size_t replicates() const noexcept { return replicates_; }

 private:
  std::size_t replicates_;
  Seed seed_;
  std::size_t threads_;
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, Measure, std::size_t, std::size_t>, NullEnsemble> cache_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace nvc
