#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "nvc/cli/commands.hpp"

namespace {

using nvc::cli::ExitCode;
using nvc::cli::RunManifest;

struct Flags {
  RunManifest m;
  std::string manifest_path;
  std::string regions_path;
  std::string bands = "canonical";
  std::string group_stat = "mean-diff";
  std::vector<std::string> cohorts;
};

// Options that a manifest replaces; giving one alongside --manifest is an error.
struct Subcommand {
  explicit Subcommand(CLI::App* a) : app(a) {}
  CLI::App* app;
  std::vector<CLI::Option*> run_options;
  std::string measure;
};

void add_common(Subcommand& sc, Flags& f) {
  auto* app = sc.app;
  app->add_option("--manifest", f.manifest_path, "Re-run from a manifest.json written by an earlier run")->check(CLI::ExistingFile);
  app->add_option("--out-dir", f.m.out_dir, "Directory for outputs")->capture_default_str();
  app->add_option("--threads", f.m.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sc.run_options.push_back(
      app->add_option("--seed", f.m.seed, "Master seed (default from NVC_SEED, else 0)")->envname("NVC_SEED")->capture_default_str());
}

void add_recording(Subcommand& sc, Flags& f) {
  auto* app = sc.app;
  auto& o = sc.run_options;
  o.push_back(app->add_option("--input", f.m.inputs, "Recording CSV (header of channel labels, one row per sample)"));
  o.push_back(app->add_option("--regions", f.regions_path, "Region config JSON (default: 7-region 10-20 montage)")->check(CLI::ExistingFile));
  o.push_back(app->add_option("--fs", f.m.fs, "Sampling rate in Hz")->capture_default_str());
  o.push_back(app->add_option("--block-len", f.m.block_len, "Block length B in samples")->capture_default_str());
  o.push_back(app->add_option("--bands", f.bands, "'canonical' or name:lo-hi,... with (lo, hi] bands")->capture_default_str());
  o.push_back(app->add_option("--discard-secs", f.m.discard_secs, "Leading seconds dropped")->capture_default_str());
  o.push_back(app->add_flag("--standardize,!--no-standardize", f.m.standardize, "Standardize channels (default on)"));
}

void add_measure(Subcommand& sc, Flags& f, const std::string& default_measure) {
  auto* app = sc.app;
  sc.measure = default_measure;
  auto& o = sc.run_options;
  o.push_back(app->add_option("--measure", sc.measure, "t | tbar | tstar")
                  ->capture_default_str()
                  ->check(CLI::IsMember({"t", "tbar", "tstar"})));
  o.push_back(app->add_option("--q-perms", f.m.q_perms, "Maximum permutations per plan")->capture_default_str());
  o.push_back(app->add_option("--null-reps", f.m.null_reps, "Null ensemble replicates R")->capture_default_str());
}

int fail(ExitCode code, const std::string& msg) {
  std::fprintf(stderr, "nvc: %s\n", msg.c_str());
  return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear vector coherence: spectral dependence between channel groups"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nvc::cli::kToolVersion));
  Flags f;
  f.m.threads = nvc::default_thread_count();

  Subcommand analyze(app.add_subcommand("analyze", "NVC profile and p-values for every region pair"));
  add_common(analyze, f);
  add_recording(analyze, f);
  add_measure(analyze, f, "tstar");
  analyze.run_options.push_back(analyze.app->add_option("--alpha", f.m.alpha, "Significance level")->capture_default_str());

  Subcommand baseline(app.add_subcommand("baseline", "Pairwise band coherence and relative band power"));
  add_common(baseline, f);
  add_recording(baseline, f);
  baseline.run_options.push_back(baseline.app->add_option("--max-lag", f.m.max_lag, "PBC maximum lag in samples")->capture_default_str());
  baseline.run_options.push_back(
      baseline.app->add_option("--filter-order", f.m.filter_order, "Butterworth band-pass order (even)")->capture_default_str());

  Subcommand compare(app.add_subcommand("compare", "Group permutation tests on feature tables, BH adjusted"));
  add_common(compare, f);
  compare.run_options.push_back(compare.app->add_option("--cohort", f.cohorts, "NAME=features.csv (repeatable)"));
  compare.run_options.push_back(compare.app->add_option("--group-perms", f.m.group_perms, "Label permutations R_g")->capture_default_str());
  compare.run_options.push_back(compare.app->add_option("--group-stat", f.group_stat, "mean-diff | welch-t")
                                    ->capture_default_str()
                                    ->check(CLI::IsMember({"mean-diff", "welch-t"})));
  compare.run_options.push_back(compare.app->add_option("--alpha", f.m.alpha, "Significance level")->capture_default_str());

  Subcommand simulate(app.add_subcommand("simulate", "Monte Carlo study over the five dependence cases"));
  add_common(simulate, f);
  add_measure(simulate, f, "t");
  {
    auto* s = simulate.app;
    auto& o = simulate.run_options;
    o.push_back(s->add_option("--cases", f.m.cases, "Case ids")->delimiter(',')->check(CLI::Range(1, 5)));
    o.push_back(s->add_option("--n-secs", f.m.n_secs, "Recording lengths in seconds")->delimiter(','));
    o.push_back(s->add_option("--reps", f.m.replicates, "Monte Carlo replicates")->capture_default_str());
    o.push_back(s->add_option("--fs", f.m.fs, "Sampling rate in Hz")->capture_default_str());
    o.push_back(s->add_option("--block-len", f.m.block_len, "Block length B in samples")->capture_default_str());
    o.push_back(s->add_option("--alpha", f.m.alpha, "Significance level")->capture_default_str());
    o.push_back(s->add_option("--modulus", f.m.modulus, "AR(2) root modulus M")->capture_default_str());
    o.push_back(s->add_option("--burn-in", f.m.burn_in, "AR(2) burn-in samples")->capture_default_str());
  }

  Subcommand nulldist(app.add_subcommand("null-dist", "Permutation-of-ranks null ensemble for (n, p, q)"));
  add_common(nulldist, f);
  add_measure(nulldist, f, "t");
  nulldist.run_options.push_back(nulldist.app->add_option("--n", f.m.null_n, "Number of blocks")->capture_default_str());
  nulldist.run_options.push_back(nulldist.app->add_option("--p", f.m.null_p, "Predictor dimension")->capture_default_str());
  nulldist.run_options.push_back(nulldist.app->add_option("--q", f.m.null_q, "Response dimension")->capture_default_str());

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::Usage);
  }

  Subcommand* active = nullptr;
  for (Subcommand* sc : {&analyze, &baseline, &compare, &simulate, &nulldist})
    if (sc->app->parsed()) active = sc;
  const std::string command = active->app->get_name();

  try {
    RunManifest m;
    if (!f.manifest_path.empty()) {
      for (auto* opt : active->run_options)
        if (opt->count() > 0 && opt->get_name() != "--seed")
          return fail(ExitCode::Usage, opt->get_name() + " cannot be combined with --manifest");
      m = nvc::cli::manifest_from_json(nvc::cli::read_json_file(f.manifest_path));
      if (m.command != command) return fail(ExitCode::Usage, "manifest is for '" + m.command + "', not '" + command + "'");
      m.out_dir = f.m.out_dir;
      m.threads = f.m.threads;
    } else {
      m = f.m;
      m.command = command;
      if (command == "analyze" || command == "simulate" || command == "null-dist") m.measure = nvc::parse_measure(active->measure);
      if (command == "analyze" || command == "baseline") {
        m.bands = nvc::cli::parse_bands(f.bands);
        if (!f.regions_path.empty()) m.regions = nvc::cli::region_config_from_json(nvc::cli::read_json_file(f.regions_path));
      }
      if (command == "compare") {
        m.group_statistic = nvc::cli::parse_group_statistic(f.group_stat);
        for (const auto& c : f.cohorts) {
          const auto eq = c.find('=');
          if (eq == std::string::npos || eq == 0 || eq + 1 == c.size())
            return fail(ExitCode::Usage, "--cohort expects NAME=path, got '" + c + "'");
          m.cohorts.emplace_back(c.substr(0, eq), c.substr(eq + 1));
        }
      }
    }
    for (const auto& path : nvc::cli::run_command(m)) std::printf("wrote %s\n", path.c_str());
  } catch (const std::exception& e) {
    return fail(nvc::cli::exit_code_for(e), e.what());
  }
  return 0;
}
