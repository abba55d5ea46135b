#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>

#include "nvc/cli/commands.hpp"
#include "synthetic.hpp"

using namespace nvc;
using namespace nvc::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("nvc_test_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void put(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

TimeSeriesMatrix parse(const std::string& text, double fs = 100.0) {
  std::istringstream in(text);
  return read_csv(in, fs);
}

template <class F>
ParseError parse_error(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no ParseError";
  return ParseError("none", 0, 0);
}

RunManifest small_analyze(const fs::path& input, const fs::path& out) {
  RunManifest m;
  m.command = "analyze";
  m.inputs = {input.string()};
  m.null_reps = 200;
  m.q_perms = 6;
  m.seed = 5;
  m.out_dir = out.string();
  return m;
}

}  // namespace

TEST(Csv, HeaderAndRows) {
  const auto ts = parse("a,b , c\n1,2,3\n4.5,-1e-3,+6\n\n7,8,9\r\n", 250.0);
  EXPECT_EQ(ts.labels(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(ts.samples(), 3u);
  EXPECT_EQ(ts.fs(), 250.0);
  EXPECT_EQ(ts(1, 0), 4.5);
  EXPECT_EQ(ts(1, 1), -1e-3);
  EXPECT_EQ(ts(1, 2), 6.0);
  EXPECT_EQ(ts(2, 2), 9.0);
}

TEST(Csv, ErrorsNameTheRow) {
  auto e = parse_error([] { parse("a,b\n1,2\n3\n"); });
  EXPECT_EQ(e.row(), 3u);
  e = parse_error([] { parse("a,b\n1,2\n3,4,5\n"); });
  EXPECT_EQ(e.row(), 3u);
  e = parse_error([] { parse("a,a\n1,2\n"); });
  EXPECT_EQ(e.row(), 1u);
  EXPECT_EQ(e.column(), 2u);
  e = parse_error([] { parse("a,b\n1,2\n3,NA\n"); });
  EXPECT_EQ(e.row(), 3u);
  EXPECT_EQ(e.column(), 2u);
  e = parse_error([] { parse("a,b\n1,inf\n"); });
  EXPECT_EQ(e.column(), 2u);
  e = parse_error([] { parse("a,b\n1,\n"); });
  EXPECT_EQ(e.column(), 2u);
  e = parse_error([] { parse("a,b\n1,2x\n"); });
  EXPECT_EQ(e.column(), 2u);
  EXPECT_THROW(parse(""), DataError);
  EXPECT_THROW(parse("a,b\n"), DataError);
  EXPECT_THROW(ingest_csv("/nonexistent/x.csv", 100.0), DataError);
}

TEST(Csv, WriteReadRoundTripIsExact) {
  const auto ts = nvc::testing::montage_recording(3.0, 100.0, 1);
  std::ostringstream out;
  write_csv(out, ts);
  const auto back = parse(out.str());
  ASSERT_EQ(back.labels(), ts.labels());
  for (std::size_t c = 0; c < ts.channels(); ++c)
    for (std::size_t t = 0; t < ts.samples(); ++t) ASSERT_EQ(back(t, c), ts(t, c));
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::nan("")), "NA");
}

TEST(FeatureTable, ParsesNa) {
  std::istringstream in("subject,f1,f2\ns1,1,NA\ns2,2,3\n");
  const auto t = read_feature_table(in);
  EXPECT_EQ(t.features, (std::vector<std::string>{"f1", "f2"}));
  EXPECT_EQ(t.subjects, (std::vector<std::string>{"s1", "s2"}));
  EXPECT_TRUE(std::isnan(t.values[0][1]));
  EXPECT_EQ(t.column(0), (std::vector<double>{1, 2}));
  std::istringstream bad("subject,f1\ns1,1,2\n");
  EXPECT_THROW(read_feature_table(bad), ParseError);
}

TEST(Regions, DefaultMontage) {
  const auto rc = default_montage();
  EXPECT_NO_THROW(rc.validate());
  EXPECT_EQ(rc.regions.size(), 7u);
  EXPECT_EQ(rc.resolved_pairs().size(), 21u);
  std::size_t chans = 0;
  for (const auto& r : rc.regions) {
    chans += r.channels.size();
    EXPECT_EQ(std::count(r.channels.begin(), r.channels.end(), "Fz"), 0);
  }
  EXPECT_EQ(chans, 18u);
  EXPECT_NO_THROW(rc.check_against(nvc::testing::montage_recording(2.0, 100.0, 1)));
  const TimeSeriesMatrix partial({{1.0, 2.0}}, 100.0, {"Fp1"});
  EXPECT_THROW(rc.check_against(partial), DataError);
}

TEST(Regions, JsonFormsAndValidation) {
  const auto rc = region_config_from_json(json::parse(R"({"regions": {"B": ["x"], "A": ["y", "z"]}, "pairs": [["A", "B"]]})"));
  EXPECT_EQ(rc.regions[0].name, "A");
  EXPECT_EQ(rc.resolved_pairs().size(), 1u);
  const auto again = region_config_from_json(to_json(rc));
  EXPECT_EQ(to_json(again), to_json(rc));
  EXPECT_THROW(region_config_from_json(json::parse(R"({"regions": {"A": ["x"], "B": ["x"]}})")), InvalidArgument);
  EXPECT_THROW(region_config_from_json(json::parse(R"({"regions": {"A": []}})")), InvalidArgument);
  EXPECT_THROW(region_config_from_json(json::parse(R"({"regions": {"A": ["x"]}, "pairs": [["A", "C"]]})")), InvalidArgument);
  EXPECT_THROW(region_config_from_json(json::parse(R"({"regions": {"A": ["x"]}, "pairs": [["A", "A"]]})")), InvalidArgument);
  EXPECT_THROW(region_config_from_json(json::parse(R"({"areas": {}})")), InvalidArgument);
}

TEST(Bands, Parse) {
  EXPECT_EQ(parse_bands("canonical").size(), canonical_bands().size());
  const auto b = parse_bands("lo:1-4,hi:30.5-45");
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[1].name, "hi");
  EXPECT_EQ(b[1].lo_hz, 30.5);
  EXPECT_EQ(b[1].hi_hz, 45.0);
  EXPECT_THROW(parse_bands("x:4-2"), InvalidArgument);
  EXPECT_THROW(parse_bands("x:4"), InvalidArgument);
  EXPECT_THROW(parse_bands("x:a-b"), InvalidArgument);
  EXPECT_THROW(parse_bands("x:1-2,x:3-4"), InvalidArgument);
  EXPECT_THROW(parse_bands(":1-2"), InvalidArgument);
}

TEST(Manifest, RoundTrip) {
  for (const char* cmd : {"analyze", "baseline", "compare", "simulate", "null-dist"}) {
    RunManifest m;
    m.command = cmd;
    m.inputs = {"/data/s1.csv"};
    m.cohorts = {{"A", "a.csv"}, {"B", "b.csv"}};
    m.bands = parse_bands("lo:1-4,hi:30-45");
    m.seed = 123456789012345ULL;
    m.measure = Measure::TBar;
    m.group_statistic = GroupStatistic::WelchT;
    m.cases = {2, 4};
    m.n_secs = {30};
    m.null_q = 3;
    const json j = to_json(m);
    EXPECT_EQ(to_json(manifest_from_json(j)), j) << cmd;
    EXPECT_FALSE(j.contains("threads"));
  }
  EXPECT_THROW(manifest_from_json(json::parse(R"({"seed": 1})")), InvalidArgument);
  EXPECT_THROW(manifest_from_json(json::parse(R"({"command": "analyze", "seed": 1, "measure": "tt"})")), InvalidArgument);
}

TEST(Commands, AnalyzeMontage) {
  const auto dir = scratch("analyze");
  nvc::testing::write_recording((dir / "s01.csv").string(), nvc::testing::montage_recording(65.0, 100.0, 2));
  const auto res = cmd_analyze(small_analyze(dir / "s01.csv", dir / "out"));
  EXPECT_EQ(res.subject, "s01");
  EXPECT_EQ(res.blocks, 60u);
  ASSERT_EQ(res.pairs.size(), 21u);
  EXPECT_GT(res.null_hits, 0u);
  for (const auto& pp : res.pairs) {
    ASSERT_TRUE(pp.profile) << pp.name << ": " << pp.error;
    EXPECT_EQ(pp.profile->records.size(), 49u);
  }
  // LF and RF share alpha latents channel by channel.
  const auto& lfrf = res.pairs.front();
  ASSERT_EQ(lfrf.name, "LF-RF");
  EXPECT_GT(lfrf.profile->bands.at("alpha").mean_estimate, 0.35);
  EXPECT_EQ(lfrf.profile->bands.at("alpha").significant, lfrf.profile->bands.at("alpha").frequencies);
  double other = 0.0;
  for (std::size_t i = 1; i < res.pairs.size(); ++i) other += res.pairs[i].profile->bands.at("alpha").mean_estimate / 20.0;
  EXPECT_LT(other, 0.25);
  for (const char* f : {"nvc_profile.csv", "nvc_bands.csv", "nvc_features.csv", "nvc_profile.json", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  const auto doc = json::parse(slurp(dir / "out" / "nvc_profile.json"));
  EXPECT_EQ(doc.at("pairs").size(), 21u);
  // 21 pairs * 7 bands feature columns plus the subject column.
  std::istringstream feat(slurp(dir / "out" / "nvc_features.csv"));
  std::string header;
  std::getline(feat, header);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), static_cast<long>(21 * canonical_bands().size()));
}

TEST(Commands, AnalyzeErrors) {
  const auto dir = scratch("analyze_err");
  nvc::testing::write_recording((dir / "s.csv").string(), nvc::testing::montage_recording(7.0, 100.0, 3));
  auto m = small_analyze(dir / "s.csv", dir / "out");
  m.discard_secs = 8.0;
  EXPECT_THROW(cmd_analyze(m), DataError);
  m.discard_secs = 1.0;
  m.block_len = 1000;
  EXPECT_THROW(cmd_analyze(m), BlockTooLong);
  m.block_len = 100;
  m.inputs.clear();
  EXPECT_THROW(cmd_analyze(m), InvalidArgument);
  m.inputs = {(dir / "s.csv").string()};
  m.regions = RegionConfig{{{"A", {"Fp1"}}, {"B", {"XX"}}}, {}};
  EXPECT_THROW(cmd_analyze(m), DataError);
}

TEST(Commands, BaselineDuplicateChannels) {
  const auto dir = scratch("baseline");
  std::mt19937_64 eng(4);
  std::normal_distribution<double> g;
  std::vector<double> a(3000), b(3000);
  for (auto& v : a) v = g(eng);
  for (auto& v : b) v = g(eng);
  nvc::testing::write_recording((dir / "r.csv").string(), TimeSeriesMatrix({a, a, b}, 100.0, {"a", "a2", "b"}));
  RunManifest m;
  m.command = "baseline";
  m.inputs = {(dir / "r.csv").string()};
  m.regions = RegionConfig{{{"A", {"a"}}, {"A2", {"a2"}}, {"B", {"b"}}}, {}};
  m.out_dir = (dir / "out").string();
  const auto res = cmd_baseline(m);
  for (const auto& band : canonical_bands()) {
    EXPECT_NEAR(res.pbc.at("A-A2").at(band.name), 1.0, 1e-9) << band.name;
    EXPECT_LT(res.pbc.at("A-B").at(band.name), 0.2) << band.name;
  }
  double sum = 0.0;
  for (const auto& [name, v] : res.rbp.at("A")) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_TRUE(fs::exists(dir / "out" / "pbc_features.csv"));
}

TEST(Commands, CompareIdenticalAndShifted) {
  const auto dir = scratch("compare");
  put(dir / "a.csv", "subject,f,g\ns1,1,10\ns2,2,11\ns3,3,12\ns4,4,13\ns5,5,14\ns6,6,15\n");
  put(dir / "b.csv", "subject,f,g\nt1,1,30\nt2,2,31\nt3,3,32\nt4,4,33\nt5,5,34\nt6,6,35\n");
  RunManifest m;
  m.command = "compare";
  m.cohorts = {{"A", (dir / "a.csv").string()}, {"B", (dir / "b.csv").string()}};
  m.group_perms = 999;
  m.out_dir = (dir / "out").string();
  const auto res = cmd_group_compare(m);
  ASSERT_EQ(res.rows.size(), 2u);
  EXPECT_EQ(res.rows[0].feature, "f");
  EXPECT_EQ(res.rows[0].p_raw, 1.0);
  EXPECT_FALSE(res.rows[0].significant);
  EXPECT_LT(res.rows[1].p_raw, 0.01);
  EXPECT_TRUE(res.rows[1].significant);
  EXPECT_EQ(res.family_size, 2u);

  put(dir / "c.csv", "subject,f,h\nu1,1,2\nu2,2,3\n");
  m.cohorts.emplace_back("C", (dir / "c.csv").string());
  EXPECT_THROW(cmd_group_compare(m), DataError);
  m.cohorts = {{"A", (dir / "a.csv").string()}};
  EXPECT_THROW(cmd_group_compare(m), InvalidArgument);
}

TEST(Commands, SimulateAndNullDist) {
  const auto dir = scratch("sim");
  RunManifest m;
  m.command = "simulate";
  m.cases = {1};
  m.n_secs = {20};
  m.replicates = 10;
  m.null_reps = 100;
  m.measure = Measure::T;
  m.out_dir = (dir / "sim").string();
  const auto res = cmd_simulate(m);
  EXPECT_EQ(res.report.runs.size(), 1u);
  EXPECT_TRUE(fs::exists(dir / "sim" / "simulation_sets.csv"));

  RunManifest n;
  n.command = "null-dist";
  n.null_n = 40;
  n.null_q = 2;
  n.null_reps = 300;
  n.measure = Measure::T;
  n.out_dir = (dir / "null").string();
  const auto nr = cmd_null_dist(n);
  EXPECT_EQ(nr.ensemble.size(), 300u);
  EXPECT_EQ(nr.ensemble.n, 40u);
  const auto doc = json::parse(slurp(dir / "null" / "null.json"));
  EXPECT_EQ(doc.at("replicates"), 300);
  n.null_n = 1;
  EXPECT_THROW(cmd_null_dist(n), InvalidArgument);
}

TEST(Commands, ExitCodes) {
  EXPECT_EQ(static_cast<int>(exit_code_for(InvalidArgument("x"))), 1);
  EXPECT_EQ(static_cast<int>(exit_code_for(ParseError("x", 1, 1))), 2);
  EXPECT_EQ(static_cast<int>(exit_code_for(BlockTooLong("x"))), 2);
  EXPECT_EQ(static_cast<int>(exit_code_for(DegenerateRanks("x"))), 3);
}

#ifdef NVC_CLI_PATH

namespace {

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + NVC_CLI_PATH + "\" " + args + " >\"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void expect_same_outputs(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
  }
  EXPECT_GT(files, 1u);
}

}  // namespace

TEST(Binary, ExitCodes) {
  const auto dir = scratch("bin_codes");
  const auto log = dir / "log.txt";
  EXPECT_EQ(run_cli("", log), 1);
  EXPECT_EQ(run_cli("--version", log), 0);
  EXPECT_EQ(run_cli("analyze --measure nope", log), 1);
  EXPECT_EQ(run_cli("analyze --input " + (dir / "missing.csv").string() + " --out-dir " + dir.string(), log), 2);
  put(dir / "bad.csv", "a,b\n1,2\n3\n");
  EXPECT_EQ(run_cli("analyze --input " + (dir / "bad.csv").string() + " --out-dir " + dir.string(), log), 2);
  EXPECT_NE(slurp(log).find("row 3"), std::string::npos);
  EXPECT_EQ(run_cli("null-dist --n 1 --out-dir " + dir.string(), log), 1);
}

TEST(Binary, ManifestRerunIsByteIdentical) {
  const auto dir = scratch("bin_rerun");
  const auto log = dir / "log.txt";
  nvc::testing::write_recording((dir / "s.csv").string(), nvc::testing::montage_recording(40.0, 100.0, 7));
  const std::string first = (dir / "one").string(), second = (dir / "two").string();
  ASSERT_EQ(run_cli("analyze --input " + (dir / "s.csv").string() + " --null-reps 200 --q-perms 6 --seed 11 --out-dir " + first, log), 0)
      << slurp(log);
  ASSERT_EQ(run_cli("analyze --manifest " + first + "/manifest.json --threads 2 --out-dir " + second, log), 0) << slurp(log);
  expect_same_outputs(first, second);
  EXPECT_EQ(run_cli("analyze --manifest " + first + "/manifest.json --fs 200 --out-dir " + second, log), 1);
  EXPECT_EQ(run_cli("baseline --manifest " + first + "/manifest.json --out-dir " + second, log), 1);
}

TEST(Binary, SeedFromEnvironment) {
  const auto dir = scratch("bin_env");
  const auto log = dir / "log.txt";
  ASSERT_EQ(run_cli("null-dist --n 30 --null-reps 100 --seed 9 --out-dir " + (dir / "a").string(), log), 0);
  ASSERT_EQ(::setenv("NVC_SEED", "9", 1), 0);
  ASSERT_EQ(run_cli("null-dist --n 30 --null-reps 100 --out-dir " + (dir / "b").string(), log), 0);
  ::unsetenv("NVC_SEED");
  expect_same_outputs(dir / "a", dir / "b");
}

#endif
