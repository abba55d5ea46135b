#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvc/error.hpp"
#include "nvc/hypothesis.hpp"
#include "nvc/simulation.hpp"
#include "nvc/spectral.hpp"

namespace nvc::cli {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

struct Region {
  std::string name;
  std::vector<std::string> channels;
};

struct RegionConfig {
  std::vector<Region> regions;
  std::vector<std::pair<std::string, std::string>> pairs;  // empty: all unordered pairs

  const Region& region(const std::string& name) const {
    for (const auto& r : regions)
      if (r.name == name) return r;
    throw InvalidArgument("region config: unknown region '" + name + "'");
  }

  std::vector<std::pair<std::string, std::string>> resolved_pairs() const {
    if (!pairs.empty()) return pairs;
    std::vector<std::pair<std::string, std::string>> all;
    for (std::size_t i = 0; i < regions.size(); ++i)
      for (std::size_t j = i + 1; j < regions.size(); ++j) all.emplace_back(regions[i].name, regions[j].name);
    return all;
  }

  void validate() const {
    if (regions.empty()) throw InvalidArgument("region config: no regions");
    std::set<std::string> names, chans;
    for (const auto& r : regions) {
      if (r.name.empty()) throw InvalidArgument("region config: empty region name");
      if (!names.insert(r.name).second) throw InvalidArgument("region config: duplicate region '" + r.name + "'");
      if (r.channels.empty()) throw InvalidArgument("region config: region '" + r.name + "' has no channels");
      for (const auto& c : r.channels)
        if (!chans.insert(c).second) throw InvalidArgument("region config: channel '" + c + "' is in more than one region");
    }
    for (const auto& [a, b] : pairs) {
      region(a);
      region(b);
      if (a == b) throw InvalidArgument("region config: pair '" + a + "' with itself");
    }
  }

  // Every configured channel must exist in the recording.
  void check_against(const TimeSeriesMatrix& ts) const {
    for (const auto& r : regions)
      for (const auto& c : r.channels)
        if (!ts.find(c)) throw DataError("region '" + r.name + "': channel '" + c + "' not present in recording");
  }
};

// 10-20 montage grouped into seven regions; Fz is left out.
inline RegionConfig default_montage() {
  return {{{"LF", {"Fp1", "F3", "F7"}},
           {"RF", {"Fp2", "F4", "F8"}},
           {"LT", {"T3", "T5"}},
           {"RT", {"T4", "T6"}},
           {"C", {"C3", "Cz", "C4"}},
           {"P", {"P3", "Pz", "P4"}},
           {"O", {"O1", "O2"}}},
          {}};
}

inline json to_json(const RegionConfig& rc) {
  json regions = json::array();
  for (const auto& r : rc.regions) regions.push_back({{"name", r.name}, {"channels", r.channels}});
  json pairs = json::array();
  for (const auto& [a, b] : rc.pairs) pairs.push_back({a, b});
  return {{"regions", regions}, {"pairs", pairs}};
}

// {"regions": [{"name": "LF", "channels": ["Fp1", ...]}, ...], "pairs": [["LF", "RF"], ...]}
// An object form {"regions": {"LF": [...]}} is accepted too; its regions
// come out in key order.
inline RegionConfig region_config_from_json(const json& j) {
  RegionConfig rc;
  try {
    const auto& regions = j.at("regions");
    if (regions.is_object()) {
      for (const auto& [name, chans] : regions.items()) rc.regions.push_back({name, chans.get<std::vector<std::string>>()});
    } else {
      for (const auto& r : regions) rc.regions.push_back({r.at("name").get<std::string>(), r.at("channels").get<std::vector<std::string>>()});
    }
    if (j.contains("pairs"))
      for (const auto& p : j.at("pairs")) {
        if (!p.is_array() || p.size() != 2) throw InvalidArgument("region config: each pair must list two regions");
        rc.pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
      }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("region config: ") + e.what());
  }
  rc.validate();
  return rc;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("'" + path + "': " + e.what());
  }
}

// "canonical" or "name:lo-hi,name:lo-hi,..." with half-open (lo, hi] bands.
inline std::vector<FrequencyBand> parse_bands(const std::string& spec) {
  if (spec.empty() || spec == "canonical") return canonical_bands();
  std::vector<FrequencyBand> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const std::string item = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto colon = item.find(':');
    const auto dash = item.find('-', colon == std::string::npos ? 0 : colon + 1);
    if (colon == std::string::npos || dash == std::string::npos || colon == 0)
      throw InvalidArgument("bands: expected name:lo-hi, got '" + item + "'");
    FrequencyBand b;
    b.name = item.substr(0, colon);
    try {
      std::size_t used = 0;
      const std::string lo = item.substr(colon + 1, dash - colon - 1);
      const std::string hi = item.substr(dash + 1);
      b.lo_hz = std::stod(lo, &used);
      if (used != lo.size()) throw InvalidArgument("");
      b.hi_hz = std::stod(hi, &used);
      if (used != hi.size()) throw InvalidArgument("");
    } catch (const std::exception&) {
      throw InvalidArgument("bands: bad limits in '" + item + "'");
    }
    if (!(b.lo_hz >= 0.0 && b.lo_hz < b.hi_hz)) throw InvalidArgument("bands: need 0 <= lo < hi in '" + item + "'");
    for (const auto& prev : out)
      if (prev.name == b.name) throw InvalidArgument("bands: duplicate band '" + b.name + "'");
    out.push_back(b);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline json to_json(const std::vector<FrequencyBand>& bands) {
  json out = json::array();
  for (const auto& b : bands) out.push_back({{"name", b.name}, {"lo_hz", b.lo_hz}, {"hi_hz", b.hi_hz}});
  return out;
}

inline std::vector<FrequencyBand> bands_from_json(const json& j) {
  std::vector<FrequencyBand> out;
  for (const auto& b : j) out.push_back({b.at("name").get<std::string>(), b.at("lo_hz").get<double>(), b.at("hi_hz").get<double>()});
  return out;
}

// Everything that determines a run. Written next to the outputs; passing it
// back with --manifest reproduces them byte for byte.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;                           // analyze, baseline
  std::vector<std::pair<std::string, std::string>> cohorts;  // compare: name, path
  std::optional<RegionConfig> regions;                       // unset: default montage
  double fs = 100.0;
  std::size_t block_len = 100;
  std::vector<FrequencyBand> bands = canonical_bands();
  Measure measure = Measure::TStar;
  std::size_t q_perms = kDefaultMaxPermutations;
  std::size_t null_reps = kDefaultNullReplicates;
  double alpha = 0.05;
  Seed seed = 0;
  double discard_secs = 5.0;
  bool standardize = true;
  std::size_t threads = 1;
  std::string out_dir = ".";

  // baseline
  std::size_t max_lag = 50;
  int filter_order = 4;
  // compare
  std::size_t group_perms = kDefaultGroupPermutations;
  GroupStatistic group_statistic = GroupStatistic::MeanDifference;
  // simulate
  std::vector<int> cases{1, 2, 3, 4, 5};
  std::vector<std::size_t> n_secs{50, 100, 200};
  std::size_t replicates = 200;
  double modulus = sim::kDefaultModulus;
  std::size_t burn_in = sim::kDefaultBurnIn;
  // null-dist
  std::size_t null_n = 100;
  std::size_t null_p = 1;
  std::size_t null_q = 1;

  RegionConfig region_config() const { return regions ? *regions : default_montage(); }
};

inline std::string to_string(GroupStatistic g) { return g == GroupStatistic::WelchT ? "welch-t" : "mean-diff"; }

inline GroupStatistic parse_group_statistic(const std::string& s) {
  if (s == "mean-diff") return GroupStatistic::MeanDifference;
  if (s == "welch-t") return GroupStatistic::WelchT;
  throw InvalidArgument("group statistic must be mean-diff or welch-t, got '" + s + "'");
}

// Fields that do not influence a command's outputs are left out, so
// manifests stay minimal; threads never changes results and is omitted.
inline json to_json(const RunManifest& m) {
  json j;
  j["tool_version"] = kToolVersion;
  j["command"] = m.command;
  j["seed"] = m.seed;
  if (m.command == "analyze" || m.command == "baseline") {
    j["inputs"] = m.inputs;
    j["regions"] = to_json(m.region_config());
    j["fs"] = m.fs;
    j["discard_secs"] = m.discard_secs;
    j["standardize"] = m.standardize;
    j["block_len"] = m.block_len;
    j["bands"] = to_json(m.bands);
  }
  if (m.command == "analyze") {
    j["measure"] = to_string(m.measure);
    j["q_perms"] = m.q_perms;
    j["null_reps"] = m.null_reps;
    j["alpha"] = m.alpha;
  }
  if (m.command == "baseline") {
    j["max_lag"] = m.max_lag;
    j["filter_order"] = m.filter_order;
  }
  if (m.command == "compare") {
    json c = json::array();
    for (const auto& [name, path] : m.cohorts) c.push_back({{"name", name}, {"path", path}});
    j["cohorts"] = c;
    j["group_perms"] = m.group_perms;
    j["group_statistic"] = to_string(m.group_statistic);
    j["alpha"] = m.alpha;
  }
  if (m.command == "simulate") {
    j["cases"] = m.cases;
    j["n_secs"] = m.n_secs;
    j["replicates"] = m.replicates;
    j["fs"] = m.fs;
    j["block_len"] = m.block_len;
    j["measure"] = to_string(m.measure);
    j["q_perms"] = m.q_perms;
    j["null_reps"] = m.null_reps;
    j["alpha"] = m.alpha;
    j["modulus"] = m.modulus;
    j["burn_in"] = m.burn_in;
  }
  if (m.command == "null-dist") {
    j["n"] = m.null_n;
    j["p"] = m.null_p;
    j["q"] = m.null_q;
    j["measure"] = to_string(m.measure);
    j["q_perms"] = m.q_perms;
    j["null_reps"] = m.null_reps;
  }
  return j;
}

inline RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.seed = j.at("seed").get<Seed>();
    auto opt = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    opt("inputs", m.inputs);
    if (j.contains("regions")) m.regions = region_config_from_json(j.at("regions"));
    opt("fs", m.fs);
    opt("discard_secs", m.discard_secs);
    opt("standardize", m.standardize);
    opt("block_len", m.block_len);
    if (j.contains("bands")) m.bands = bands_from_json(j.at("bands"));
    if (j.contains("measure")) m.measure = parse_measure(j.at("measure").get<std::string>());
    opt("q_perms", m.q_perms);
    opt("null_reps", m.null_reps);
    opt("alpha", m.alpha);
    opt("max_lag", m.max_lag);
    opt("filter_order", m.filter_order);
    if (j.contains("cohorts"))
      for (const auto& c : j.at("cohorts")) m.cohorts.emplace_back(c.at("name").get<std::string>(), c.at("path").get<std::string>());
    opt("group_perms", m.group_perms);
    if (j.contains("group_statistic")) m.group_statistic = parse_group_statistic(j.at("group_statistic").get<std::string>());
    opt("cases", m.cases);
    opt("n_secs", m.n_secs);
    opt("replicates", m.replicates);
    opt("modulus", m.modulus);
    opt("burn_in", m.burn_in);
    opt("n", m.null_n);
    opt("p", m.null_p);
    opt("q", m.null_q);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("manifest: ") + e.what());
  }
  return m;
}

}  // namespace nvc::cli
