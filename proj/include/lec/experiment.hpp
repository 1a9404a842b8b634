#pragma once

// Experiment runner: dataset + noise + a list of training methods, repeated
// over seeds, with per-run metric CSVs, a summary CSV and a manifest that is
// itself a complete config.
//
// Config syntax (one `key = value` per line, `#` starts a comment):
//
//   [dataset]     source = synthetic|idx, cluster and split keys, idx paths
//   [noise]       kind = sym|asym|openset|semantic, ratio, seed, ...
//   [train]       defaults shared by every method
//   [method NAME] one training run per repeat; keys override [train]
//   [experiment]  repeats, output, threads, dump_selections
//
// The full key list is in README.md.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lec/dataset.hpp"
#include "lec/metrics.hpp"
#include "lec/noise.hpp"
#include "lec/trainers.hpp"

namespace lec {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct DatasetConfig {
  enum class Source { Synthetic, Idx };
  Source source = Source::Synthetic;
  ClusterSpec clusters{10, 1000, 32, 1.0, 4.0, 0, 11};
  SplitSpec split{0.5, 0.5, 5};
  std::filesystem::path train_images, train_labels, test_images, test_labels;
};

struct NoiseConfig {
  NoiseKind kind = NoiseKind::Sym;
  double ratio = 0.0;
  std::uint64_t seed = 100;
  // OpenSet: out-of-distribution features, either synthetic clusters on axes
  // disjoint from the in-distribution means, or an IDX image file.
  DatasetConfig::Source openset_source = DatasetConfig::Source::Synthetic;
  std::filesystem::path openset_images;
  // Semantic: ensemble size and epochs each member trains on clean data.
  int ensemble = 5;
  int ensemble_epochs = 20;
};

struct MethodEntry {
  std::string label;
  TrainConfig train;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  NoiseConfig noise;
  TrainConfig defaults;
  std::vector<MethodEntry> methods;
  int repeats = 1;
  std::filesystem::path output = "lec_out";
  int threads = 1;
  bool dump_selections = false;
};

ExperimentConfig parse_config(std::istream& in, const std::string& source_name = "<config>",
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// The resolved config (every key explicit) followed by the derived seeds of
/// every repeat as comments. Parsing it back yields an equivalent config.
std::string render_manifest(const ExperimentConfig& cfg);

/// Seeds of one repeat. Noise seeds vary per repeat but are shared by all
/// methods; semantic noise is generated once for all repeats.
struct RepeatSeeds {
  std::uint64_t noise = 0;
  std::uint64_t init = 0;
  std::uint64_t shuffle = 0;
  std::uint64_t dropout = 0;
};
RepeatSeeds repeat_seeds(const ExperimentConfig& cfg, const MethodEntry& method, int repeat);

inline constexpr const char* kRunCsvHeader = "epoch,test_acc,label_precision,recall,used_count,skipped_updates";
void write_run_csv(std::ostream& os, const RunLog& log);

struct MethodResult {
  std::string label;
  std::vector<RunLog> runs;  // one per repeat
  RunSummary summary;
};

struct ExperimentResult {
  std::vector<MethodResult> methods;
};

/// Clean train/test sets and one noisy train set per repeat.
struct PreparedData {
  LabeledDataset clean_train;
  LabeledDataset test;
  std::vector<LabeledDataset> noisy_train;
};
PreparedData prepare_data(const ExperimentConfig& cfg);

/// Trains every (method, repeat) pair and writes `<label>_r<k>.csv`,
/// `labels_r<k>.csv`, `summary.csv` and `manifest.txt` under cfg.output.
/// Completed run files stay on disk if a later run fails.
ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const PreparedData& data);

enum class SweepParam { EnsembleSize, AssumedNoise };

struct SweepPoint {
  std::string value;
  ExperimentResult result;
};

/// One experiment per grid value under `<output>/<param>_<value>/`, all sharing
/// the same noisy datasets, plus `<output>/sweep_summary.csv`. An empty grid
/// means the default: {1,3,5,inf} for M, {0.9, 1, 1.1} x noise ratio for eps.
std::vector<SweepPoint> sweep(const ExperimentConfig& cfg, SweepParam param, std::vector<std::string> grid = {});

}  // namespace lec
