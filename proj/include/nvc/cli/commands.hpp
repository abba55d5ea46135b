#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvc/baselines.hpp"
#include "nvc/cli/config.hpp"
#include "nvc/cli/csv.hpp"
#include "nvc/hypothesis.hpp"
#include "nvc/parallel.hpp"
#include "nvc/profile.hpp"
#include "nvc/simulation.hpp"
#include "nvc/spectral.hpp"

namespace nvc::cli {

enum class ExitCode : int { Ok = 0, Usage = 1, Data = 2, Numerical = 3 };

inline ExitCode exit_code_for(const std::exception& e) {
  if (dynamic_cast<const BlockTooLong*>(&e)) return ExitCode::Data;
  if (dynamic_cast<const DataError*>(&e)) return ExitCode::Data;
  if (dynamic_cast<const NumericalError*>(&e)) return ExitCode::Numerical;
  if (dynamic_cast<const InvalidArgument*>(&e)) return ExitCode::Usage;
  return ExitCode::Data;
}

// Run-wide seeds. The permutation plan for a dimension and the null
// ensemble for (n, measure, p, q) depend only on the run seed, so analyze
// and null-dist with equal seeds use the same null.
inline Seed plan_seed(Seed seed) { return derive_seed(seed, {0x706c616eULL}); }
inline Seed null_cache_seed(Seed seed) { return derive_seed(seed, {0x6e756c6cULL}); }

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
inline json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw DataError("write failed for '" + path.string() + "'");
    written_.push_back(path.string());
  }

  const std::vector<std::string>& written() const noexcept { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

inline std::string subject_name(const std::string& path) { return std::filesystem::path(path).stem().string(); }

// Reads a recording and applies the leading discard and standardization.
inline TimeSeriesMatrix load_recording(const std::string& path, const RunManifest& m) {
  TimeSeriesMatrix ts = ingest_csv(path, m.fs);
  const auto drop = static_cast<std::size_t>(std::llround(m.discard_secs * m.fs));
  if (m.discard_secs < 0.0) throw InvalidArgument("discard-secs must be >= 0");
  if (drop >= ts.samples())
    throw DataError("'" + path + "': recording has " + std::to_string(ts.samples()) + " samples, fewer than the leading discard");
  ts = ts.drop_leading(drop);
  return m.standardize ? ts.standardized() : ts;
}

inline const std::string& single_input(const RunManifest& m) {
  if (m.inputs.size() != 1) throw InvalidArgument(m.command + ": exactly one --input is required");
  return m.inputs.front();
}

// ---------------------------------------------------------------- analyze

struct PairProfile {
  std::string name;
  std::string x_region;
  std::string y_region;
  std::optional<SpectralDependenceProfile> profile;
  std::vector<std::optional<double>> p_adj;  // parallel to profile->records
  std::string error;
};

struct AnalyzeResult {
  RunManifest manifest;
  std::string subject;
  std::size_t blocks = 0;
  std::vector<PairProfile> pairs;
  std::size_t null_hits = 0;
  std::size_t null_misses = 0;
  std::vector<std::string> files;
};

inline AnalyzeResult cmd_analyze(const RunManifest& m) {
  AnalyzeResult res;
  res.manifest = m;
  const std::string& input = single_input(m);
  res.subject = subject_name(input);
  for (const auto& b : m.bands) b.validate(m.fs);
  const RegionConfig rc = m.region_config();
  rc.validate();
  const TimeSeriesMatrix ts = load_recording(input, m);
  rc.check_against(ts);

  std::map<std::string, BlockPeriodogramTensor> tensors;
  for (const auto& r : rc.regions) tensors.emplace(r.name, block_periodograms(ts.select(r.channels), m.block_len, m.threads));
  res.blocks = tensors.begin()->second.blocks();

  NullEnsembleCache cache(m.null_reps, null_cache_seed(m.seed), m.threads);
  const auto pairs = rc.resolved_pairs();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [a, b] = pairs[i];
    PairProfile pp{a + "-" + b, a, b, std::nullopt, {}, {}};
    try {
      const auto& xp = tensors.at(a);
      const auto& yp = tensors.at(b);
      const PlanPair plans = default_plans(xp.channels(), yp.channels(), plan_seed(m.seed), m.q_perms);
      NvcConfig nc{m.block_len, m.measure, m.q_perms, derive_seed(m.seed, {0x70616972ULL, i}), m.threads, {}, plans};
      const NvcEstimates est = nvc_profile(xp, yp, nc);
      const NullEnsemble& ens = cache.get(est.blocks, m.measure, est.p, est.q, plans);
      SpectralDependenceProfile prof = make_profile(est, ens, m.bands, m.alpha);
      prof.meta.block_len = m.block_len;
      prof.meta.seed = nc.seed;
      pp.profile = std::move(prof);
    } catch (const Error& e) {
      pp.error = e.what();
    }
    res.pairs.push_back(std::move(pp));
  }
  res.null_hits = cache.hits();
  res.null_misses = cache.misses();

  // BH over every (pair, frequency) p-value of the run.
  std::vector<double> raw;
  for (const auto& pp : res.pairs)
    if (pp.profile)
      for (const auto& r : pp.profile->records)
        if (r.p_value) raw.push_back(*r.p_value);
  const auto adj = bh_adjust(raw);
  std::size_t next = 0;
  for (auto& pp : res.pairs) {
    if (!pp.profile) continue;
    for (const auto& r : pp.profile->records) pp.p_adj.push_back(r.p_value ? std::optional<double>(adj[next++]) : std::nullopt);
  }

  std::ostringstream csv, bands_csv, features;
  csv << "pair,band,freq_hz,estimate,p_raw,p_adj\n";
  bands_csv << "pair,band,mean_estimate,significant,frequencies\n";
  features << "subject";
  std::vector<std::string> feature_values;
  json jpairs = json::array();
  for (const auto& pp : res.pairs) {
    json jp{{"pair", pp.name}, {"x_region", pp.x_region}, {"y_region", pp.y_region}};
    if (!pp.profile) {
      jp["error"] = pp.error;
      for (const auto& b : m.bands) {
        features << ',' << csv_field(pp.name + ":" + b.name);
        feature_values.push_back("NA");
      }
      jpairs.push_back(jp);
      continue;
    }
    const auto& prof = *pp.profile;
    json recs = json::array();
    for (std::size_t s = 0; s < prof.records.size(); ++s) {
      const auto& r = prof.records[s];
      const std::string band = band_of(m.bands, r.freq_hz);
      csv << pp.name << ',' << band << ',' << format_double(r.freq_hz) << ',' << format_optional(r.estimate) << ','
          << format_optional(r.p_value) << ',' << format_optional(pp.p_adj[s]) << '\n';
      recs.push_back({{"freq_hz", r.freq_hz}, {"band", band}, {"estimate", optional_json(r.estimate)},
                      {"p_raw", optional_json(r.p_value)}, {"p_adj", optional_json(pp.p_adj[s])}});
    }
    json jb = json::object();
    for (const auto& b : m.bands) {
      features << ',' << csv_field(pp.name + ":" + b.name);
      auto it = prof.bands.find(b.name);
      if (it == prof.bands.end()) {
        feature_values.push_back("NA");
        continue;
      }
      const auto& br = it->second;
      bands_csv << pp.name << ',' << b.name << ',' << format_double(br.mean_estimate) << ',' << br.significant << ','
                << br.frequencies << '\n';
      feature_values.push_back(format_double(br.mean_estimate));
      jb[b.name] = {{"mean_estimate", number_json(br.mean_estimate)}, {"significant", br.significant}, {"frequencies", br.frequencies}};
    }
    jp["p"] = prof.meta.p;
    jp["q"] = prof.meta.q;
    jp["blocks"] = prof.meta.blocks;
    jp["perms_x"] = prof.meta.perms_x;
    jp["perms_y"] = prof.meta.perms_y;
    jp["seed"] = prof.meta.seed;
    jp["null_seed"] = prof.meta.null_seed;
    jp["null_replicates"] = prof.meta.null_replicates;
    jp["failures"] = prof.failures;
    jp["records"] = recs;
    jp["bands"] = jb;
    jpairs.push_back(jp);
  }
  features << '\n' << csv_field(res.subject);
  for (const auto& v : feature_values) features << ',' << v;
  features << '\n';

  json doc{{"manifest", to_json(m)},
           {"subject", res.subject},
           {"blocks", res.blocks},
           {"few_blocks", res.blocks < kRecommendedMinBlocks},
           {"pairs", jpairs},
           {"null_cache", {{"hits", res.null_hits}, {"misses", res.null_misses}}}};
  OutputDir out(m.out_dir);
  out.write("nvc_profile.csv", csv.str());
  out.write("nvc_bands.csv", bands_csv.str());
  out.write("nvc_features.csv", features.str());
  out.write("nvc_profile.json", doc.dump(2) + "\n");
  out.write("manifest.json", to_json(m).dump(2) + "\n");
  res.files = out.written();
  return res;
}

// --------------------------------------------------------------- baseline

struct BaselineResult {
  RunManifest manifest;
  std::string subject;
  std::map<std::string, std::map<std::string, double>> pbc;  // pair -> band -> mean PBC
  std::map<std::string, std::map<std::string, double>> rbp;  // region -> band -> mean RBP
  std::vector<std::string> files;
};

inline BaselineResult cmd_baseline(const RunManifest& m) {
  BaselineResult res;
  res.manifest = m;
  const std::string& input = single_input(m);
  res.subject = subject_name(input);
  for (const auto& b : m.bands) b.validate(m.fs);
  const RegionConfig rc = m.region_config();
  rc.validate();
  const TimeSeriesMatrix ts = load_recording(input, m);
  rc.check_against(ts);
  const auto pairs = rc.resolved_pairs();
  const FilterSpec spec{m.filter_order, true, true};

  std::vector<std::string> used;
  for (const auto& r : rc.regions) used.insert(used.end(), r.channels.begin(), r.channels.end());
  const TimeSeriesMatrix sel = ts.select(used);

  std::ostringstream pbc_csv, rbp_csv, pbc_feat, rbp_feat;
  pbc_csv << "pair,band,pbc\n";
  rbp_csv << "region,band,rbp\n";
  pbc_feat << "subject";
  rbp_feat << "subject";
  std::vector<std::string> pbc_vals, rbp_vals;

  for (const auto& band : m.bands) {
    const auto filtered = bandpass(sel, band, spec);
    std::vector<double> means(pairs.size());
    parallel_for(pairs.size(), m.threads, [&](std::size_t i) {
      const auto& xr = rc.region(pairs[i].first);
      const auto& yr = rc.region(pairs[i].second);
      double sum = 0.0;
      for (const auto& cx : xr.channels)
        for (const auto& cy : yr.channels)
          sum += pbc(filtered.data.channel(*filtered.data.find(cx)), filtered.data.channel(*filtered.data.find(cy)), m.max_lag);
      means[i] = sum / static_cast<double>(xr.channels.size() * yr.channels.size());
    });
    for (std::size_t i = 0; i < pairs.size(); ++i) res.pbc[pairs[i].first + "-" + pairs[i].second][band.name] = means[i];
  }
  for (const auto& r : rc.regions) res.rbp[r.name] = region_rbp(sel.select(r.channels), m.bands, m.bands, m.block_len);

  json jp = json::object(), jr = json::object();
  for (const auto& [a, b] : pairs) {
    const std::string name = a + "-" + b;
    for (const auto& band : m.bands) {
      const double v = res.pbc[name][band.name];
      pbc_csv << name << ',' << band.name << ',' << format_double(v) << '\n';
      pbc_feat << ',' << csv_field(name + ":" + band.name);
      pbc_vals.push_back(format_double(v));
      jp[name][band.name] = number_json(v);
    }
  }
  for (const auto& r : rc.regions) {
    for (const auto& band : m.bands) {
      const double v = res.rbp[r.name].at(band.name);
      rbp_csv << r.name << ',' << band.name << ',' << format_double(v) << '\n';
      rbp_feat << ',' << csv_field(r.name + ":" + band.name);
      rbp_vals.push_back(format_double(v));
      jr[r.name][band.name] = number_json(v);
    }
  }
  pbc_feat << '\n' << csv_field(res.subject);
  for (const auto& v : pbc_vals) pbc_feat << ',' << v;
  pbc_feat << '\n';
  rbp_feat << '\n' << csv_field(res.subject);
  for (const auto& v : rbp_vals) rbp_feat << ',' << v;
  rbp_feat << '\n';

  json doc{{"manifest", to_json(m)}, {"subject", res.subject}, {"pbc", jp}, {"rbp", jr}};
  OutputDir out(m.out_dir);
  out.write("pbc.csv", pbc_csv.str());
  out.write("rbp.csv", rbp_csv.str());
  out.write("pbc_features.csv", pbc_feat.str());
  out.write("rbp_features.csv", rbp_feat.str());
  out.write("baseline.json", doc.dump(2) + "\n");
  out.write("manifest.json", to_json(m).dump(2) + "\n");
  res.files = out.written();
  return res;
}

// ---------------------------------------------------------------- compare

struct Comparison {
  std::string cohort_a;
  std::string cohort_b;
  std::string feature;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double statistic = std::numeric_limits<double>::quiet_NaN();
  double p_raw = std::numeric_limits<double>::quiet_NaN();
  double p_adj = std::numeric_limits<double>::quiet_NaN();
  bool significant = false;
};

struct CompareResult {
  RunManifest manifest;
  std::vector<std::string> cohort_names;
  std::vector<Comparison> rows;
  std::size_t family_size = 0;
  std::vector<std::string> files;
};

// Every unordered pair of cohorts, every feature; BH over the whole family.
// A cohort named more than once gathers the rows of all its files.
inline CompareResult cmd_group_compare(const RunManifest& m) {
  CompareResult res;
  res.manifest = m;
  std::vector<FeatureTable> cohorts;
  for (const auto& [name, path] : m.cohorts) {
    FeatureTable t = read_feature_table(path);
    auto it = std::find(res.cohort_names.begin(), res.cohort_names.end(), name);
    if (it == res.cohort_names.end()) {
      res.cohort_names.push_back(name);
      cohorts.push_back(std::move(t));
      continue;
    }
    auto& into = cohorts[static_cast<std::size_t>(it - res.cohort_names.begin())];
    if (t.features != into.features) throw DataError("compare: feature columns of '" + path + "' do not match cohort '" + name + "'");
    into.subjects.insert(into.subjects.end(), t.subjects.begin(), t.subjects.end());
    into.values.insert(into.values.end(), t.values.begin(), t.values.end());
  }
  if (cohorts.size() < 2) throw InvalidArgument("compare: need at least two cohorts");
  for (std::size_t c = 1; c < cohorts.size(); ++c)
    if (cohorts[c].features != cohorts[0].features)
      throw DataError("compare: feature columns of cohort '" + res.cohort_names[c] + "' do not match '" + res.cohort_names[0] + "'");
  for (std::size_t c = 0; c < cohorts.size(); ++c)
    if (cohorts[c].values.size() < 2) throw DataError("compare: cohort '" + res.cohort_names[c] + "' has fewer than 2 subjects");

  const auto& features = cohorts[0].features;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> tasks;
  for (std::size_t a = 0; a < cohorts.size(); ++a)
    for (std::size_t b = a + 1; b < cohorts.size(); ++b)
      for (std::size_t f = 0; f < features.size(); ++f) tasks.emplace_back(a, b, f);
  res.rows.resize(tasks.size());
  parallel_for(tasks.size(), m.threads, [&](std::size_t t) {
    const auto [a, b, f] = tasks[t];
    auto finite = [](std::vector<double> v) {
      std::erase_if(v, [](double x) { return !std::isfinite(x); });
      return v;
    };
    const auto va = finite(cohorts[a].column(f));
    const auto vb = finite(cohorts[b].column(f));
    Comparison& row = res.rows[t];
    row.cohort_a = res.cohort_names[a];
    row.cohort_b = res.cohort_names[b];
    row.feature = features[f];
    row.n_a = va.size();
    row.n_b = vb.size();
    if (va.size() < 2 || vb.size() < 2) return;
    const auto tr = group_permutation_test(va, vb, m.group_perms, derive_seed(m.seed, {0x67727070ULL, a, b, f}), m.alpha,
                                           m.group_statistic);
    row.statistic = tr.statistic;
    row.p_raw = tr.p_value;
  });
  std::vector<double> raw;
  for (const auto& r : res.rows) raw.push_back(r.p_raw);
  const auto adj = bh_adjust(raw);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    res.rows[i].p_adj = adj[i];
    res.rows[i].significant = std::isfinite(adj[i]) && adj[i] < m.alpha;
    if (std::isfinite(res.rows[i].p_raw)) ++res.family_size;
  }

  std::ostringstream csv;
  csv << "cohort_a,cohort_b,feature,n_a,n_b,statistic,p_raw,p_adj,significant\n";
  json rows = json::array();
  for (const auto& r : res.rows) {
    csv << csv_field(r.cohort_a) << ',' << csv_field(r.cohort_b) << ',' << csv_field(r.feature) << ',' << r.n_a << ',' << r.n_b << ','
        << format_double(r.statistic) << ',' << format_double(r.p_raw) << ',' << format_double(r.p_adj) << ','
        << (r.significant ? 1 : 0) << '\n';
    rows.push_back({{"cohort_a", r.cohort_a}, {"cohort_b", r.cohort_b}, {"feature", r.feature}, {"n_a", r.n_a}, {"n_b", r.n_b},
                    {"statistic", number_json(r.statistic)}, {"p_raw", number_json(r.p_raw)}, {"p_adj", number_json(r.p_adj)},
                    {"significant", r.significant}});
  }
  json doc{{"manifest", to_json(m)}, {"cohorts", res.cohort_names}, {"family_size", res.family_size}, {"rows", rows}};
  OutputDir out(m.out_dir);
  out.write("compare.csv", csv.str());
  out.write("compare.json", doc.dump(2) + "\n");
  out.write("manifest.json", to_json(m).dump(2) + "\n");
  res.files = out.written();
  return res;
}

// --------------------------------------------------------------- simulate

inline sim::StudyConfig study_config(const RunManifest& m) {
  sim::StudyConfig cfg;
  cfg.cases = m.cases;
  cfg.n_secs = m.n_secs;
  cfg.replicates = m.replicates;
  cfg.block_len = m.block_len;
  cfg.fs = m.fs;
  cfg.alpha = m.alpha;
  cfg.seed = m.seed;
  cfg.measure = m.measure;
  cfg.max_perms = m.q_perms;
  cfg.null_replicates = m.null_reps;
  cfg.threads = m.threads;
  cfg.sim = {m.modulus, m.burn_in};
  return cfg;
}

inline std::string simulation_csv(const sim::SimulationReport& rep) {
  std::ostringstream csv;
  csv << "case,n_sec,freq_hz,mean,q025,q975,se,reject_rate\n";
  for (const auto& r : rep.runs)
    for (const auto& f : r.freqs)
      csv << r.case_id << ',' << r.n_sec << ',' << format_double(f.freq_hz) << ',' << format_double(f.mean) << ','
          << format_double(f.q025) << ',' << format_double(f.q975) << ',' << format_double(f.se) << ','
          << format_double(f.reject_rate) << '\n';
  return csv.str();
}

inline json simulation_json(const sim::SimulationReport& rep) {
  json runs = json::array();
  for (const auto& r : rep.runs) {
    json freqs = json::array();
    for (const auto& f : r.freqs)
      freqs.push_back({{"freq_hz", f.freq_hz}, {"mean", number_json(f.mean)}, {"q025", number_json(f.q025)},
                       {"q975", number_json(f.q975)}, {"se", number_json(f.se)}, {"reject_rate", number_json(f.reject_rate)},
                       {"count", f.count}});
    json sets = json::array();
    for (const auto& s : r.sets)
      sets.push_back({{"name", s.name}, {"induced", s.induced}, {"avg_se", number_json(s.avg_se)},
                      {"reject_rate", number_json(s.reject_rate)}, {"frequencies", s.frequencies}});
    runs.push_back({{"case", r.case_id}, {"n_sec", r.n_sec}, {"blocks", r.blocks}, {"p", r.p}, {"q", r.q},
                    {"null_seed", r.null_seed}, {"failed_replicates", r.failed_replicates},
                    {"missing_values", r.missing_values}, {"replicates", rep.config.replicates}, {"freqs", freqs},
                    {"sets", sets}});
  }
  return {{"runs", runs}, {"null_cache", {{"hits", rep.null_cache_hits}, {"misses", rep.null_cache_misses}}}};
}

struct SimulateResult {
  RunManifest manifest;
  sim::SimulationReport report;
  std::vector<std::string> files;
};

inline SimulateResult cmd_simulate(const RunManifest& m) {
  SimulateResult res{m, sim::run_study(study_config(m)), {}};
  json doc = simulation_json(res.report);
  doc["manifest"] = to_json(m);
  std::ostringstream sets;
  sets << "case,n_sec,set,induced,avg_se,reject_rate\n";
  for (const auto& r : res.report.runs)
    for (const auto& s : r.sets)
      sets << r.case_id << ',' << r.n_sec << ',' << csv_field(s.name) << ',' << (s.induced ? 1 : 0) << ','
           << format_double(s.avg_se) << ',' << format_double(s.reject_rate) << '\n';
  OutputDir out(m.out_dir);
  out.write("simulation.csv", simulation_csv(res.report));
  out.write("simulation_sets.csv", sets.str());
  out.write("simulation.json", doc.dump(2) + "\n");
  out.write("manifest.json", to_json(m).dump(2) + "\n");
  res.files = out.written();
  return res;
}

// -------------------------------------------------------------- null-dist

struct NullDistResult {
  RunManifest manifest;
  NullEnsemble ensemble;
  std::vector<std::string> files;
};

inline NullDistResult cmd_null_dist(const RunManifest& m) {
  if (m.null_n < 2) throw InvalidArgument("null-dist: n must be >= 2");
  if (m.null_p < 1 || m.null_q < 1) throw InvalidArgument("null-dist: p and q must be >= 1");
  NullEnsembleCache cache(m.null_reps, null_cache_seed(m.seed), m.threads);
  const PlanPair plans = default_plans(m.null_p, m.null_q, plan_seed(m.seed), m.q_perms);
  NullDistResult res{m, cache.get(m.null_n, m.measure, m.null_p, m.null_q, plans), {}};
  const auto& ens = res.ensemble;

  std::ostringstream csv;
  csv << "replicate,value\n";
  for (std::size_t r = 0; r < ens.reps.size(); ++r) csv << r << ',' << format_double(ens.reps[r]) << '\n';
  double mean = 0.0;
  for (double v : ens.reps) mean += v;
  mean /= static_cast<double>(ens.reps.size());
  double ss = 0.0;
  for (double v : ens.reps) ss += (v - mean) * (v - mean);
  const double sd = ens.reps.size() > 1 ? std::sqrt(ss / static_cast<double>(ens.reps.size() - 1)) : 0.0;
  json q = json::object();
  for (double prob : {0.5, 0.9, 0.95, 0.99}) q[format_double(prob)] = sim::quantile_sorted(ens.sorted, prob);
  json doc{{"manifest", to_json(m)}, {"n", ens.n},         {"p", m.null_p},     {"q", ens.q},
           {"measure", to_string(ens.measure)}, {"seed", ens.seed}, {"replicates", ens.size()},
           {"redraws", ens.redraws}, {"mean", mean}, {"sd", sd}, {"quantiles", q}};
  OutputDir out(m.out_dir);
  out.write("null.csv", csv.str());
  out.write("null.json", doc.dump(2) + "\n");
  out.write("manifest.json", to_json(m).dump(2) + "\n");
  res.files = out.written();
  return res;
}

inline std::vector<std::string> run_command(const RunManifest& m) {
  if (m.command == "analyze") return cmd_analyze(m).files;
  if (m.command == "baseline") return cmd_baseline(m).files;
  if (m.command == "compare") return cmd_group_compare(m).files;
  if (m.command == "simulate") return cmd_simulate(m).files;
  if (m.command == "null-dist") return cmd_null_dist(m).files;
  throw InvalidArgument("unknown command '" + m.command + "'");
}

}  // namespace nvc::cli
