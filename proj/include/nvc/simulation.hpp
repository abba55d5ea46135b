#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nvc/error.hpp"
#include "nvc/hypothesis.hpp"
#include "nvc/parallel.hpp"
#include "nvc/seed.hpp"
#include "nvc/spectral.hpp"

namespace nvc::sim {

inline constexpr double kDefaultModulus = 0.9925;
inline constexpr std::size_t kDefaultBurnIn = 1000;

// AR(2) latent oscillation with a spectral peak near peak_hz:
//   Z_t = 2 M cos(2 pi peak/fs) Z_{t-1} - M^2 Z_{t-2} + w_t,  w_t ~ N(0, 1).
struct LatentOscillatorSpec {
  double peak_hz = 10.0;
  double fs = 100.0;
  double modulus = kDefaultModulus;
  std::size_t length = 0;
  std::size_t burn_in = kDefaultBurnIn;

  void validate() const {
    if (!(fs > 0.0)) throw InvalidArgument("LatentOscillatorSpec: fs must be positive");
    if (!(peak_hz > 0.0 && peak_hz < fs / 2.0)) throw InvalidArgument("LatentOscillatorSpec: need 0 < peak < fs/2");
    if (!(modulus >= 0.0 && modulus < 1.0)) throw InvalidArgument("LatentOscillatorSpec: need 0 <= M < 1");
  }
};

// Burn-in discarded; the kept samples are standardized to zero sample mean
// and unit sample variance.
inline std::vector<double> gen_latent(const LatentOscillatorSpec& spec, Seed seed) {
  spec.validate();
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> innovation(0.0, 1.0);
  const double a1 = 2.0 * spec.modulus * std::cos(2.0 * std::numbers::pi * spec.peak_hz / spec.fs);
  const double a2 = -spec.modulus * spec.modulus;
  std::vector<double> out(spec.length);
  double z1 = 0.0, z2 = 0.0;
  for (std::size_t t = 0; t < spec.burn_in + spec.length; ++t) {
    const double z = a1 * z1 + a2 * z2 + innovation(engine);
    z2 = z1;
    z1 = z;
    if (t >= spec.burn_in) out[t - spec.burn_in] = z;
  }
  TimeSeriesMatrix::standardize_in_place(out);
  return out;
}

enum class Rhythm { Theta, Alpha, Gamma };

constexpr double peak_hz(Rhythm r) noexcept {
  switch (r) {
    case Rhythm::Theta: return 6.0;
    case Rhythm::Alpha: return 10.0;
    case Rhythm::Gamma: return 37.5;
  }
  return 0.0;
}

// One latent process, identified by rhythm and subscript (Z^alpha_1, ...).
// Channels naming the same LatentRef share its realization.
struct LatentRef {
  Rhythm rhythm;
  int index;
  friend constexpr auto operator<=>(const LatentRef&, const LatentRef&) = default;
};

// Channel = sum_d phi_d Z_d + phi_last * eps, with eps a fresh standard
// normal series for every channel.
struct ChannelWiring {
  std::string label;
  std::vector<LatentRef> latents;
};

struct MixingSpec {
  std::vector<double> phi;  // latent weights followed by the noise weight

  void validate() const {
    double sum = 0.0;
    for (double w : phi) {
      if (!(w > 0.0)) throw InvalidArgument("MixingSpec: weights must be positive");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("MixingSpec: weights must sum to 1");
  }
};

struct CaseSpec {
  int case_id = 0;
  MixingSpec mixing;
  std::vector<ChannelWiring> x;
  std::vector<ChannelWiring> y;

  std::size_t p() const noexcept { return x.size(); }
  std::size_t q() const noexcept { return y.size(); }
};

// The five dependence designs. Cases 1-3 mix one alpha latent with noise
// at (0.75, 0.25); Cases 4-5 mix a theta and a gamma latent with noise at
// (0.375, 0.375, 0.25).
inline CaseSpec case_spec(int case_id) {
  using R = Rhythm;
  const MixingSpec two{{0.75, 0.25}};
  const MixingSpec three{{0.375, 0.375, 0.25}};
  switch (case_id) {
    case 1:
      return {1, two, {{"X1", {{R::Alpha, 1}}}, {"X2", {{R::Alpha, 2}}}}, {{"Y1", {{R::Alpha, 1}}}, {"Y2", {{R::Alpha, 2}}}}};
    case 2:
      return {2, two, {{"X1", {{R::Alpha, 1}}}, {"X2", {{R::Alpha, 2}}}}, {{"Y1", {{R::Alpha, 1}}}, {"Y2", {{R::Alpha, 3}}}}};
    case 3:
      return {3, two, {{"X1", {{R::Alpha, 1}}}, {"X2", {{R::Alpha, 2}}}}, {{"Y1", {{R::Alpha, 3}}}, {"Y2", {{R::Alpha, 4}}}}};
    case 4:
      return {4, three,
              {{"X1", {{R::Theta, 1}, {R::Gamma, 1}}}, {"X2", {{R::Theta, 2}, {R::Gamma, 2}}}, {"X3", {{R::Theta, 3}, {R::Gamma, 3}}}},
              {{"Y1", {{R::Theta, 1}, {R::Gamma, 1}}}, {"Y2", {{R::Theta, 2}, {R::Gamma, 2}}}, {"Y3", {{R::Theta, 3}, {R::Gamma, 4}}}}};
    case 5:
      return {5, three,
              {{"X1", {{R::Theta, 1}, {R::Gamma, 1}}}, {"X2", {{R::Theta, 2}, {R::Gamma, 2}}}, {"X3", {{R::Theta, 3}, {R::Gamma, 3}}}},
              {{"Y1", {{R::Theta, 1}, {R::Gamma, 1}}}, {"Y2", {{R::Theta, 2}, {R::Gamma, 2}}}, {"Y3", {{R::Theta, 4}, {R::Gamma, 3}}}}};
    default: throw InvalidArgument("case_spec: case id must be in 1..5");
  }
}

struct SimOptions {
  double modulus = kDefaultModulus;
  std::size_t burn_in = kDefaultBurnIn;
};

struct CaseData {
  TimeSeriesMatrix x;
  TimeSeriesMatrix y;
};

inline CaseData gen_case(int case_id, std::size_t n_sec, double fs, Seed seed, const SimOptions& opts = {}) {
  if (n_sec < 10) throw InvalidArgument("gen_case: need at least 10 seconds");
  const CaseSpec spec = case_spec(case_id);
  spec.mixing.validate();
  const auto length = static_cast<std::size_t>(std::llround(static_cast<double>(n_sec) * fs));

  std::map<LatentRef, std::vector<double>> latents;
  auto latent = [&](const LatentRef& ref) -> const std::vector<double>& {
    auto it = latents.find(ref);
    if (it != latents.end()) return it->second;
    const LatentOscillatorSpec ls{peak_hz(ref.rhythm), fs, opts.modulus, length, opts.burn_in};
    const Seed s = derive_seed(seed, {0x6c6174ULL, static_cast<std::uint64_t>(ref.rhythm), static_cast<std::uint64_t>(ref.index)});
    return latents.emplace(ref, gen_latent(ls, s)).first->second;
  };
  auto mix = [&](const std::vector<ChannelWiring>& group, std::uint64_t group_tag) {
    std::vector<std::vector<double>> chans;
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < group.size(); ++c) {
      const auto& wiring = group[c];
      if (wiring.latents.size() + 1 != spec.mixing.phi.size()) throw InvalidArgument("gen_case: wiring does not match phi");
      std::vector<double> ch(length, 0.0);
      for (std::size_t d = 0; d < wiring.latents.size(); ++d) {
        const auto& z = latent(wiring.latents[d]);
        for (std::size_t t = 0; t < length; ++t) ch[t] += spec.mixing.phi[d] * z[t];
      }
      std::mt19937_64 engine(derive_seed(seed, {0x6e6f6973ULL, group_tag, c}));
      std::normal_distribution<double> noise(0.0, 1.0);
      const double w = spec.mixing.phi.back();
      for (double& v : ch) v += w * noise(engine);
      chans.push_back(std::move(ch));
      labels.push_back(wiring.label);
    }
    return TimeSeriesMatrix(std::move(chans), fs, std::move(labels));
  };
  CaseData data{mix(spec.x, 0), mix(spec.y, 1)};
  return data;
}

// Frequency ranges a study summarizes over, each with or without induced
// dependence. The last set of every case is the complement of the others.
struct FrequencySet {
  std::string name;
  std::vector<FrequencyBand> bands;  // empty: complement of the other sets
  bool induced = false;
};

inline std::vector<FrequencySet> frequency_sets(int case_id) {
  if (case_id <= 3) {
    const bool induced = case_id != 3;
    return {{"(8,12]", {{"alpha", 8.0, 12.0}}, induced}, {"not (8,12]", {}, false}};
  }
  return {{"(4,8]", {{"theta", 4.0, 8.0}}, true}, {"(35,40]", {{"gamma*", 35.0, 40.0}}, true}, {"not (4,8] or (35,40]", {}, false}};
}

struct StudyConfig {
  std::vector<int> cases{1, 2, 3, 4, 5};
  std::vector<std::size_t> n_secs{50, 100, 200};
  std::size_t replicates = 200;
  std::size_t block_len = 100;
  double fs = 100.0;
  double alpha = 0.05;
  Seed seed = 0;
  Measure measure = Measure::T;
  std::size_t max_perms = kDefaultMaxPermutations;
  std::size_t null_replicates = kDefaultNullReplicates;
  std::size_t threads = 1;
  SimOptions sim{};
};

struct FrequencySummary {
  double freq_hz = 0.0;
  double mean = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double se = 0.0;  // standard deviation of the estimate across replicates
  double reject_rate = 0.0;
  std::size_t count = 0;  // replicates with a non-missing estimate
};

struct FrequencySetSummary {
  std::string name;
  bool induced = false;
  double avg_se = 0.0;
  double reject_rate = 0.0;
  std::size_t frequencies = 0;
};

struct CaseReport {
  int case_id = 0;
  std::size_t n_sec = 0;
  std::size_t blocks = 0;
  std::size_t p = 0;
  std::size_t q = 0;
  Seed null_seed = 0;
  std::vector<FrequencySummary> freqs;
  std::vector<FrequencySetSummary> sets;
  std::size_t failed_replicates = 0;
  std::size_t missing_values = 0;
};

struct SimulationReport {
  StudyConfig config;
  std::vector<CaseReport> runs;
  std::size_t null_cache_hits = 0;
  std::size_t null_cache_misses = 0;

  const CaseReport& run(int case_id, std::size_t n_sec) const {
    for (const auto& r : runs)
      if (r.case_id == case_id && r.n_sec == n_sec) return r;
    throw InvalidArgument("SimulationReport: no run for case " + std::to_string(case_id) + ", n = " + std::to_string(n_sec));
  }
};

// Type-7 (linear interpolation) sample quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct ReplicateResult {
  std::vector<std::optional<double>> estimate;
  std::vector<std::optional<double>> p_value;
  bool failed = false;
  std::string error;
};

// One replicate: simulate, estimate the profile and attach p-values.
inline ReplicateResult run_replicate(const StudyConfig& cfg, int case_id, std::size_t n_sec, Seed seed, const NullEnsemble& ens,
                                     const PlanPair& plans) {
  ReplicateResult out;
  const CaseData data = gen_case(case_id, n_sec, cfg.fs, seed, cfg.sim);
  NvcConfig nc{cfg.block_len, cfg.measure, cfg.max_perms, derive_seed(seed, {0x6e7663ULL}), 1, {}, plans};
  const NvcEstimates est = nvc_profile(block_periodograms(data.x, cfg.block_len), block_periodograms(data.y, cfg.block_len), nc);
  out.estimate = est.estimate;
  out.p_value.resize(est.estimate.size());
  for (std::size_t s = 0; s < est.estimate.size(); ++s)
    if (est.estimate[s]) out.p_value[s] = p_value(*est.estimate[s], ens);
  return out;
}

// Monte Carlo study over cases and sample sizes. Replicates run in
// parallel with seeds derived from (seed, case, n_sec, replicate); every
// summary is reduced in replicate order, so the report is reproducible.
inline SimulationReport run_study(const StudyConfig& cfg) {
  if (cfg.replicates < 10) throw InvalidArgument("run_study: need at least 10 replicates");
  for (int c : cfg.cases)
    if (c < 1 || c > 5) throw InvalidArgument("run_study: case id must be in 1..5");
  SimulationReport report;
  report.config = cfg;
  NullEnsembleCache cache(cfg.null_replicates, derive_seed(cfg.seed, {0x6e756c6cULL}), cfg.threads);

  for (int case_id : cfg.cases) {
    const CaseSpec spec = case_spec(case_id);
    for (std::size_t n_sec : cfg.n_secs) {
      CaseReport cr;
      cr.case_id = case_id;
      cr.n_sec = n_sec;
      cr.p = spec.p();
      cr.q = spec.q();
      cr.blocks = static_cast<std::size_t>(std::llround(static_cast<double>(n_sec) * cfg.fs)) / cfg.block_len;
      const PlanPair plans = default_plans(cr.p, cr.q, derive_seed(cfg.seed, {0x706c616eULL}), cfg.max_perms);
      const NullEnsemble& ens = cache.get(cr.blocks, cfg.measure, cr.p, cr.q, plans);
      cr.null_seed = ens.seed;

      std::vector<ReplicateResult> results(cfg.replicates);
      parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
        const Seed s = derive_seed(cfg.seed, {0x726570ULL, static_cast<std::uint64_t>(case_id), n_sec, r});
        try {
          results[r] = run_replicate(cfg, case_id, n_sec, s, ens, plans);
        } catch (const Error& e) {
          results[r].failed = true;
          results[r].error = e.what();
        }
      });

      for (const auto& res : results) cr.failed_replicates += res.failed ? 1 : 0;
      if (static_cast<double>(cr.failed_replicates) > 0.01 * static_cast<double>(cfg.replicates))
        throw NumericalError("run_study: more than 1% of replicates failed for case " + std::to_string(case_id));

      const std::size_t K = retained_frequency_count(cfg.block_len);
      for (std::size_t s = 0; s < K; ++s) {
        FrequencySummary fsum;
        fsum.freq_hz = static_cast<double>(s + 1) * cfg.fs / static_cast<double>(cfg.block_len);
        std::vector<double> vals;
        std::size_t rejects = 0;
        std::size_t tested = 0;
        for (const auto& res : results) {
          if (res.failed) continue;
          if (!res.estimate[s]) {
            ++cr.missing_values;
            continue;
          }
          vals.push_back(*res.estimate[s]);
          ++tested;
          if (*res.p_value[s] < cfg.alpha) ++rejects;
        }
        fsum.count = vals.size();
        if (!vals.empty()) {
          double sum = 0.0;
          for (double v : vals) sum += v;
          fsum.mean = sum / static_cast<double>(vals.size());
          double ss = 0.0;
          for (double v : vals) ss += (v - fsum.mean) * (v - fsum.mean);
          fsum.se = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
          std::sort(vals.begin(), vals.end());
          fsum.q025 = quantile_sorted(vals, 0.025);
          fsum.q975 = quantile_sorted(vals, 0.975);
          fsum.reject_rate = static_cast<double>(rejects) / static_cast<double>(tested);
        } else {
          fsum.mean = fsum.se = fsum.q025 = fsum.q975 = fsum.reject_rate = std::numeric_limits<double>::quiet_NaN();
        }
        cr.freqs.push_back(fsum);
      }

      const auto sets = frequency_sets(case_id);
      std::vector<int> owner(cr.freqs.size(), -1);
      for (std::size_t i = 0; i + 1 < sets.size(); ++i)
        for (std::size_t s = 0; s < cr.freqs.size(); ++s)
          for (const auto& b : sets[i].bands)
            if (owner[s] < 0 && b.contains(cr.freqs[s].freq_hz)) owner[s] = static_cast<int>(i);
      for (std::size_t i = 0; i < sets.size(); ++i) {
        FrequencySetSummary ss{sets[i].name, sets[i].induced, 0.0, 0.0, 0};
        const int want = i + 1 == sets.size() ? -1 : static_cast<int>(i);
        for (std::size_t s = 0; s < cr.freqs.size(); ++s) {
          if (owner[s] != want || cr.freqs[s].count == 0) continue;
          ss.avg_se += cr.freqs[s].se;
          ss.reject_rate += cr.freqs[s].reject_rate;
          ++ss.frequencies;
        }
        if (ss.frequencies > 0) {
          ss.avg_se /= static_cast<double>(ss.frequencies);
          ss.reject_rate /= static_cast<double>(ss.frequencies);
        }
        cr.sets.push_back(ss);
      }
      report.runs.push_back(std::move(cr));
    }
  }
  report.null_cache_hits = cache.hits();
  report.null_cache_misses = cache.misses();
  return report;
}

}  // namespace nvc::sim
