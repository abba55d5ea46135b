#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nvc/hypothesis.hpp"
#include "nvc/spectral.hpp"

namespace nvc {

struct FrequencyRecord {
  double freq_hz = 0.0;
  std::optional<double> estimate;
  std::optional<double> p_value;
};

struct BandRecord {
  double mean_estimate = 0.0;  // aggregate per BandAggregation; NaN if all missing
  std::size_t significant = 0;  // in-band frequencies with p < alpha
  std::size_t frequencies = 0;
};

struct ProfileMeta {
  std::size_t block_len = 0;
  std::size_t blocks = 0;
  std::size_t p = 0;
  std::size_t q = 0;
  std::size_t perms_x = 0;
  std::size_t perms_y = 0;
  Measure measure = Measure::T;
  std::size_t null_replicates = 0;
  Seed seed = 0;
  Seed null_seed = 0;
};

// NVC estimate and p-value at every retained frequency, with band
// aggregates.
struct SpectralDependenceProfile {
  std::vector<FrequencyRecord> records;
  std::map<std::string, BandRecord> bands;
  std::vector<std::string> failures;
  ProfileMeta meta;
};

// Attaches p-values from `ens` to the estimates and summarizes `bands`.
// Bands without a retained frequency are skipped.
inline SpectralDependenceProfile make_profile(const NvcEstimates& est, const NullEnsemble& ens,
                                              const std::vector<FrequencyBand>& bands, double alpha,
                                              BandAggregation how = BandAggregation::Mean) {
  if (ens.n != est.blocks) throw InvalidArgument("make_profile: null ensemble built for a different block count");
  SpectralDependenceProfile prof;
  prof.failures = est.failures;
  for (std::size_t s = 0; s < est.freqs_hz.size(); ++s) {
    FrequencyRecord rec{est.freqs_hz[s], est.estimate[s], std::nullopt};
    if (rec.estimate) rec.p_value = p_value(*rec.estimate, ens);
    prof.records.push_back(rec);
  }
  for (const auto& band : bands) {
    BandRecord br;
    bool any = false;
    for (const auto& rec : prof.records) {
      if (!band.contains(rec.freq_hz)) continue;
      any = true;
      ++br.frequencies;
      if (rec.p_value && *rec.p_value < alpha) ++br.significant;
    }
    if (!any) continue;
    br.mean_estimate = band_summary(est.freqs_hz, est.estimate, {band}, how).at(band.name);
    prof.bands[band.name] = br;
  }
  prof.meta.blocks = est.blocks;
  prof.meta.p = est.p;
  prof.meta.q = est.q;
  prof.meta.perms_x = est.plans.x.size();
  prof.meta.perms_y = est.plans.y.size();
  prof.meta.measure = ens.measure;
  prof.meta.null_replicates = ens.size();
  prof.meta.null_seed = ens.seed;
  return prof;
}

}  // namespace nvc
