// lec: run label-noise experiments from a config file.
//
//   lec run <config> [--out DIR] [--threads N] [--dump-selections]
//   lec sweep <config> --param M|eps [--grid v1,v2,...] [--out DIR] [--threads N]

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lec/experiment.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  int threads = 0;
  bool dump = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("config", c.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (overrides [experiment] output)");
  cmd->add_option("--threads", c.threads, "worker threads (overrides [experiment] threads)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--dump-selections", c.dump, "write the ids used per epoch for every run");
}

lec::ExperimentConfig load(const Common& c) {
  auto cfg = lec::load_config(c.config);
  if (!c.out.empty()) cfg.output = c.out;
  if (c.threads > 0) cfg.threads = c.threads;
  if (c.dump) cfg.dump_selections = true;
  return cfg;
}

void print(const std::vector<lec::MethodResult>& methods, const std::string& prefix = {}) {
  for (const auto& m : methods) {
    const auto& s = m.summary;
    std::printf("%s%-14s final %.4f +- %.4f  peak %.4f  precision %.4f  recall %.4f\n", prefix.c_str(),
                m.label.c_str(), s.final_accuracy.mean, s.final_accuracy.stddev, s.peak_accuracy.mean,
                s.final_precision.mean, s.final_recall.mean);
    for (const auto& run : m.runs)
      for (const auto& w : run.warnings) std::fprintf(stderr, "warning: %s: %s\n", m.label.c_str(), w.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning with ensemble consensus on noisy labels"};
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "train every configured method");
  add_common(run, run_opts);

  Common sweep_opts;
  std::string param;
  std::vector<std::string> grid;
  auto* sw = app.add_subcommand("sweep", "repeat the experiment over a parameter grid");
  add_common(sw, sweep_opts);
  sw->add_option("--param", param, "M (ensemble size) or eps (assumed noise percent)")
      ->required()
      ->check(CLI::IsMember({"M", "eps"}));
  sw->add_option("--grid", grid, "grid values; default {1,3,5,inf} for M, {0.9,1,1.1} x ratio for eps")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = load(run_opts);
      const auto result = lec::run_experiment(cfg);
      print(result.methods);
      std::printf("results in %s\n", cfg.output.string().c_str());
    } else {
      const auto cfg = load(sweep_opts);
      const auto which = param == "M" ? lec::SweepParam::EnsembleSize : lec::SweepParam::AssumedNoise;
      for (const auto& point : lec::sweep(cfg, which, grid)) print(point.result.methods, param + "=" + point.value + "  ");
      std::printf("results in %s\n", cfg.output.string().c_str());
    }
  } catch (const lec::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
