// Command-line front end: percentile-based double-rank research assessment.

#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dblrank/dblrank.hpp"

namespace {

struct FlagSet {
  std::string config;
  // raw values keyed like config-file entries; applied only when the flag
  // was actually given so config-file values survive
  std::map<std::string, std::string> values;
};

void add_shared_options(CLI::App* cmd, FlagSet& flags) {
  cmd->add_option("--config", flags.config, "key=value config file; flags win");
  auto bind = [cmd, &flags](const std::string& name, const std::string& help) {
    cmd->add_option_function<std::string>(
        "--" + name, [&flags, name](const std::string& v) { flags.values[name] = v; }, help);
  };
  bind("input", "input CSV (group,citations or group,percentile,share)");
  bind("out", "output directory (default: out)");
  bind("grid", "comma-separated top percentiles (default: 1,2,4,7,12,20,35,60,100)");
  bind("exclude", "percentiles excluded from fitting (default: 100)");
  bind("min-count", "drop series points with fewer papers (default: 10)");
  bind("methods", "fit methods, comma-separated from lr,lm,ml (default: lr)");
  bind("percentile", "evaluation percentile for indicators (default: 0.01)");
  bind("seed", "base RNG seed (default: 1)");
}

void add_synth_options(CLI::App* cmd, FlagSet& flags) {
  auto bind = [cmd, &flags](const std::string& name, const std::string& help) {
    cmd->add_option_function<std::string>(
        "--" + name, [&flags, name](const std::string& v) { flags.values[name] = v; }, help);
  };
  cmd->add_option_function<std::vector<std::string>>(
      "--spec",
      [&flags](const std::vector<std::string>& entries) {
        std::string joined;
        for (const auto& e : entries) {
          if (!joined.empty()) joined += ';';
          joined += e;
        }
        flags.values["spec"] = joined;
      },
      "lognormal spec label:mu:sigma:n (repeatable)");
  bind("world-extra", "background world component mu:sigma:n");
}

void add_analyze_options(CLI::App* cmd, FlagSet& flags) {
  auto bind = [cmd, &flags](const std::string& name, const std::string& help) {
    cmd->add_option_function<std::string>(
        "--" + name, [&flags, name](const std::string& v) { flags.values[name] = v; }, help);
  };
  bind("max-citations", "histogram upper bound (default: 50)");
  bind("css-depth", "characteristic-scores iterations (default: 2)");
  bind("tail-window", "tail fit citation window lo:hi (default: 50:400)");
}

void add_indicator_options(CLI::App* cmd, FlagSet& flags) {
  auto bind = [cmd, &flags](const std::string& name, const std::string& help) {
    cmd->add_option_function<std::string>(
        "--" + name, [&flags, name](const std::string& v) { flags.values[name] = v; }, help);
  };
  bind("ptop1", "observed papers in the world top 1% (with --ptop10, no input needed)");
  bind("ptop10", "observed papers in the world top 10%");
}

void add_report_options(CLI::App* cmd, FlagSet& flags) {
  cmd->add_option_function<std::string>(
      "--from-results",
      [&flags](const std::string& v) { flags.values["from-results"] = v; },
      "re-render tables from an existing results.json");
}

dblrank::RunConfig build_config(dblrank::RunMode mode, const FlagSet& flags) {
  dblrank::RunConfig cfg;
  cfg.mode = mode;
  if (!flags.config.empty()) dblrank::config::apply_config_file(cfg, flags.config);
  for (const auto& [key, value] : flags.values) dblrank::config::apply_kv(cfg, key, value);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Percentile-based double-rank citation analysis"};
  app.require_subcommand(1);

  struct Sub {
    dblrank::RunMode mode;
    CLI::App* cmd;
    FlagSet flags;
  };
  std::vector<Sub> subs;
  subs.reserve(6);

  auto make = [&](dblrank::RunMode mode, const char* name, const char* help) -> Sub& {
    subs.push_back({mode, app.add_subcommand(name, help), {}});
    add_shared_options(subs.back().cmd, subs.back().flags);
    return subs.back();
  };

  auto& synth = make(dblrank::RunMode::Synth, "synth",
                     "generate synthetic lognormal citation sets");
  add_synth_options(synth.cmd, synth.flags);
  auto& analyze = make(dblrank::RunMode::Analyze, "analyze",
                       "histograms, log bins, rank-frequency, CSS, tail fit");
  add_analyze_options(analyze.cmd, analyze.flags);
  make(dblrank::RunMode::DoubleRank, "doublerank",
       "global ranks and percentile series of each group");
  auto& fit = make(dblrank::RunMode::Fit, "fit", "fit N(x) = A x^alpha per group");
  (void)fit;
  auto& indicators = make(dblrank::RunMode::Indicators, "indicators",
                          "breakthrough probability indicators per group");
  add_indicator_options(indicators.cmd, indicators.flags);
  auto& report = make(dblrank::RunMode::Report, "report",
                      "full pipeline: analysis, double rank, fits, indicators");
  add_analyze_options(report.cmd, report.flags);
  add_report_options(report.cmd, report.flags);

  CLI11_PARSE(app, argc, argv);

  for (auto& sub : subs) {
    if (!sub.cmd->parsed()) continue;
    try {
      dblrank::run(build_config(sub.mode, sub.flags));
    } catch (const dblrank::Error& e) {
      std::cerr << "dblrank " << sub.cmd->get_name() << ": " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "dblrank " << sub.cmd->get_name() << ": " << e.what() << '\n';
      return 2;
    }
    return 0;
  }
  return 1;
}
