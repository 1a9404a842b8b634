#include "lec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "lec/random.hpp"

namespace lec {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Shortest representation that parses back to the same double.
std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string fmt_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Line {
  const std::string& source;
  int number;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(source, number, what); }

  double real(const std::string& v) const {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) fail("expected a number, got '" + v + "'");
    return out;
  }
  long long integer(const std::string& v) const {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) fail("expected an integer, got '" + v + "'");
    return out;
  }
  int positive(const std::string& v) const {
    const long long x = integer(v);
    if (x < 1 || x > 1'000'000'000) fail("expected a positive integer, got '" + v + "'");
    return static_cast<int>(x);
  }
  std::uint64_t seed(const std::string& v) const {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) fail("expected a non-negative integer seed, got '" + v + "'");
    return out;
  }
  bool boolean(const std::string& v) const {
    const auto s = lower(v);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail("expected true/false, got '" + v + "'");
  }
  EnsembleSize ensemble(const std::string& v) const {
    const auto s = lower(v);
    if (s == "inf" || s == "infinity" || s == "unbounded") return EnsembleSize::unbounded();
    return EnsembleSize(static_cast<std::size_t>(positive(v)));
  }
  DatasetConfig::Source data_source(const std::string& v) const {
    const auto s = lower(v);
    if (s == "synthetic") return DatasetConfig::Source::Synthetic;
    if (s == "idx") return DatasetConfig::Source::Idx;
    fail("unknown data source '" + v + "' (expected synthetic or idx)");
  }
};

std::string ensemble_text(EnsembleSize m) { return m.is_unbounded() ? "inf" : std::to_string(m.value()); }

std::string hidden_text(const std::vector<Index>& h) {
  std::string s;
  for (std::size_t i = 0; i < h.size(); ++i) s += (i ? "," : "") + std::to_string(h[i]);
  return s;
}

// Keys shared by [train] and [method ...]. Returns false for unknown keys.
bool apply_train_key(TrainConfig& t, const std::string& key, const std::string& value, const Line& line,
                     bool& assumed_noise_set) {
  if (key == "warmup") t.warmup_epochs = line.positive(value);
  else if (key == "epochs") t.total_epochs = line.positive(value);
  else if (key == "ensemble") t.ensemble = line.ensemble(value);
  else if (key == "assumed_noise") {
    t.assumed_noise = line.real(value);
    assumed_noise_set = true;
  } else if (key == "batch_size") t.batch_size = line.positive(value);
  else if (key == "learning_rate") t.learning_rate = line.real(value);
  else if (key == "dropout") t.dropout = line.real(value);
  else if (key == "seed") t.init_seed = t.shuffle_seed = t.dropout_seed = line.seed(value);
  else if (key == "init_seed") t.init_seed = line.seed(value);
  else if (key == "shuffle_seed") t.shuffle_seed = line.seed(value);
  else if (key == "dropout_seed") t.dropout_seed = line.seed(value);
  else if (key == "independent_members") t.independent_members = line.boolean(value);
  else if (key == "hidden") {
    t.hidden.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) t.hidden.push_back(line.positive(trim(item)));
    if (t.hidden.empty()) line.fail("hidden needs at least one width");
  } else
    return false;
  return true;
}

struct PendingMethod {
  Method method;
  std::string label;
  int header_line;
  std::vector<std::tuple<std::string, std::string, int>> overrides;
};

fs::path resolve(const fs::path& base, const std::string& v) {
  fs::path p(v);
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source_name, const fs::path& base_dir) {
  ExperimentConfig cfg;
  // One base seed per method; repeat_seeds derives the three streams from it.
  cfg.defaults.shuffle_seed = cfg.defaults.dropout_seed = cfg.defaults.init_seed;
  std::vector<PendingMethod> pending;
  bool defaults_noise_set = false;
  std::string section;
  std::string raw;
  int number = 0;
  std::set<std::string> seen_sections;

  while (std::getline(in, raw)) {
    ++number;
    const Line line{source_name, number};
    std::string text = trim(raw.substr(0, raw.find('#')));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') line.fail("unterminated section header");
      const std::string inner = trim(text.substr(1, text.size() - 2));
      const auto space = inner.find_first_of(" \t");
      const std::string head = lower(inner.substr(0, space));
      const std::string arg = space == std::string::npos ? "" : trim(inner.substr(space));
      if (head == "method") {
        if (arg.empty()) line.fail("method section needs a method name");
        const auto m = parse_method(arg);
        if (!m) line.fail("unknown method '" + arg + "'");
        pending.push_back({*m, lower(std::string(method_name(*m))), number, {}});
      } else if (head == "dataset" || head == "noise" || head == "train" || head == "experiment") {
        if (!arg.empty()) line.fail("section [" + head + "] takes no argument");
        if (!seen_sections.insert(head).second) line.fail("duplicate section [" + head + "]");
      } else {
        line.fail("unknown section [" + inner + "]");
      }
      section = head;
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) line.fail("expected 'key = value'");
    const std::string key = lower(trim(text.substr(0, eq)));
    const std::string value = trim(text.substr(eq + 1));
    if (value.empty()) line.fail("empty value for '" + key + "'");
    auto unknown = [&] { line.fail("unknown key '" + key + "' in [" + section + "]"); };

    if (section.empty()) {
      line.fail("key '" + key + "' outside of any section");
    } else if (section == "dataset") {
      auto& d = cfg.dataset;
      if (key == "source") d.source = line.data_source(value);
      else if (key == "classes") d.clusters.classes = line.positive(value);
      else if (key == "per_class") d.clusters.per_class = line.positive(value);
      else if (key == "dim") d.clusters.dim = line.positive(value);
      else if (key == "spread") d.clusters.spread = line.real(value);
      else if (key == "separation") d.clusters.separation = line.real(value);
      else if (key == "seed") d.clusters.seed = line.seed(value);
      else if (key == "train_fraction") d.split.train_fraction = line.real(value);
      else if (key == "test_fraction") d.split.test_fraction = line.real(value);
      else if (key == "split_seed") d.split.seed = line.seed(value);
      else if (key == "train_images") d.train_images = resolve(base_dir, value);
      else if (key == "train_labels") d.train_labels = resolve(base_dir, value);
      else if (key == "test_images") d.test_images = resolve(base_dir, value);
      else if (key == "test_labels") d.test_labels = resolve(base_dir, value);
      else unknown();
    } else if (section == "noise") {
      auto& n = cfg.noise;
      if (key == "kind") {
        const auto k = parse_noise_kind(value);
        if (!k) line.fail("unknown noise kind '" + value + "'");
        n.kind = *k;
      } else if (key == "ratio") {
        n.ratio = line.real(value);
        if (!(n.ratio >= 0.0 && n.ratio < 100.0)) line.fail("noise ratio must lie in [0,100)");
      } else if (key == "seed") n.seed = line.seed(value);
      else if (key == "source") n.openset_source = line.data_source(value);
      else if (key == "source_images") n.openset_images = resolve(base_dir, value);
      else if (key == "ensemble") n.ensemble = line.positive(value);
      else if (key == "ensemble_epochs") n.ensemble_epochs = line.positive(value);
      else unknown();
    } else if (section == "train") {
      if (!apply_train_key(cfg.defaults, key, value, line, defaults_noise_set)) unknown();
    } else if (section == "method") {
      auto& m = pending.back();
      if (key == "label") m.label = value;
      else m.overrides.emplace_back(key, value, number);
    } else if (section == "experiment") {
      if (key == "repeats") cfg.repeats = line.positive(value);
      else if (key == "output") cfg.output = resolve(base_dir, value);
      else if (key == "threads") cfg.threads = line.positive(value);
      else if (key == "dump_selections") cfg.dump_selections = line.boolean(value);
      else unknown();
    }
  }

  const Line end{source_name, number};
  if (pending.empty()) end.fail("no [method ...] sections");
  if (!defaults_noise_set) cfg.defaults.assumed_noise = cfg.noise.ratio;
  if (cfg.noise.kind == NoiseKind::Semantic && cfg.noise.ensemble < 2)
    end.fail("semantic noise needs ensemble >= 2");
  std::set<std::string> labels;
  for (const auto& p : pending) {
    const Line header{source_name, p.header_line};
    if (!labels.insert(p.label).second) header.fail("duplicate method label '" + p.label + "'");
    MethodEntry e{p.label, cfg.defaults};
    e.train.method = p.method;
    bool noise_set = false;
    for (const auto& [k, v, ln] : p.overrides) {
      const Line l{source_name, ln};
      if (!apply_train_key(e.train, k, v, l, noise_set)) l.fail("unknown key '" + k + "' in [method " + p.label + "]");
    }
    try {
      e.train.validate();
    } catch (const std::invalid_argument& ex) {
      header.fail("method '" + p.label + "': " + ex.what());
    }
    cfg.methods.push_back(std::move(e));
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in, path.string(), path.parent_path());
}

RepeatSeeds repeat_seeds(const ExperimentConfig& cfg, const MethodEntry& method, int repeat) {
  const auto r = static_cast<std::uint64_t>(repeat);
  RepeatSeeds s;
  s.noise = cfg.noise.kind == NoiseKind::Semantic ? cfg.noise.seed : derive_seed(cfg.noise.seed, {r});
  s.init = derive_seed(method.train.init_seed, {r, 1});
  s.shuffle = derive_seed(method.train.shuffle_seed, {r, 2});
  s.dropout = derive_seed(method.train.dropout_seed, {r, 3});
  return s;
}

namespace {

void render_train(std::ostream& os, const TrainConfig& t) {
  os << "warmup = " << t.warmup_epochs << "\n"
     << "epochs = " << t.total_epochs << "\n"
     << "ensemble = " << ensemble_text(t.ensemble) << "\n"
     << "assumed_noise = " << fmt_double(t.assumed_noise) << "\n"
     << "batch_size = " << t.batch_size << "\n"
     << "learning_rate = " << fmt_double(t.learning_rate) << "\n"
     << "hidden = " << hidden_text(t.hidden) << "\n"
     << "dropout = " << fmt_double(t.dropout) << "\n"
     << (t.init_seed == t.shuffle_seed && t.init_seed == t.dropout_seed
             ? "seed = " + std::to_string(t.init_seed) + "\n"
             : "init_seed = " + std::to_string(t.init_seed) + "\nshuffle_seed = " + std::to_string(t.shuffle_seed) +
                   "\ndropout_seed = " + std::to_string(t.dropout_seed) + "\n")
     << "independent_members = " << (t.independent_members ? "true" : "false") << "\n";
}

const char* source_text(DatasetConfig::Source s) { return s == DatasetConfig::Source::Idx ? "idx" : "synthetic"; }

}  // namespace

std::string render_manifest(const ExperimentConfig& cfg) {
  std::ostringstream os;
  const auto& d = cfg.dataset;
  os << "# resolved experiment manifest; `lec run` accepts this file as a config\n\n[dataset]\n"
     << "source = " << source_text(d.source) << "\n";
  if (d.source == DatasetConfig::Source::Synthetic) {
    os << "classes = " << d.clusters.classes << "\n"
       << "per_class = " << d.clusters.per_class << "\n"
       << "dim = " << d.clusters.dim << "\n"
       << "spread = " << fmt_double(d.clusters.spread) << "\n"
       << "separation = " << fmt_double(d.clusters.separation) << "\n"
       << "seed = " << d.clusters.seed << "\n";
  } else {
    os << "train_images = " << fs::absolute(d.train_images).string() << "\n"
       << "train_labels = " << fs::absolute(d.train_labels).string() << "\n";
    if (!d.test_images.empty())
      os << "test_images = " << fs::absolute(d.test_images).string() << "\n"
         << "test_labels = " << fs::absolute(d.test_labels).string() << "\n";
  }
  os << "train_fraction = " << fmt_double(d.split.train_fraction) << "\n"
     << "test_fraction = " << fmt_double(d.split.test_fraction) << "\n"
     << "split_seed = " << d.split.seed << "\n";

  const auto& n = cfg.noise;
  os << "\n[noise]\nkind = " << noise_kind_name(n.kind) << "\n"
     << "ratio = " << fmt_double(n.ratio) << "\n"
     << "seed = " << n.seed << "\n"
     << "source = " << source_text(n.openset_source) << "\n";
  if (!n.openset_images.empty()) os << "source_images = " << fs::absolute(n.openset_images).string() << "\n";
  os << "ensemble = " << n.ensemble << "\n"
     << "ensemble_epochs = " << n.ensemble_epochs << "\n";

  os << "\n[train]\n";
  render_train(os, cfg.defaults);
  for (const auto& m : cfg.methods) {
    os << "\n[method " << method_name(m.train.method) << "]\nlabel = " << m.label << "\n";
    render_train(os, m.train);
  }
  os << "\n[experiment]\nrepeats = " << cfg.repeats << "\n"
     << "output = " << fs::absolute(cfg.output).string() << "\n"
     << "threads = " << cfg.threads << "\n"
     << "dump_selections = " << (cfg.dump_selections ? "true" : "false") << "\n";

  os << "\n# derived seeds: method repeat noise init shuffle dropout\n";
  for (const auto& m : cfg.methods)
    for (int r = 0; r < cfg.repeats; ++r) {
      const auto s = repeat_seeds(cfg, m, r);
      os << "# " << m.label << ' ' << r << ' ' << s.noise << ' ' << s.init << ' ' << s.shuffle << ' ' << s.dropout
         << "\n";
    }
  return os.str();
}

void write_run_csv(std::ostream& os, const RunLog& log) {
  os << kRunCsvHeader << '\n';
  for (const auto& e : log.epochs)
    os << e.epoch << ',' << fmt_fixed(e.test_accuracy) << ','
       << (e.label_precision ? fmt_fixed(*e.label_precision) : std::string("NA")) << ',' << fmt_fixed(e.recall) << ','
       << e.used_count << ',' << e.skipped_updates << '\n';
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  PreparedData out;
  const auto& d = cfg.dataset;
  if (d.source == DatasetConfig::Source::Synthetic) {
    auto parts = split(synth_clusters(d.clusters), d.split);
    out.clean_train = std::move(parts.train);
    out.test = std::move(parts.test);
  } else {
    auto train = load_idx(d.train_images, d.train_labels);
    if (!d.test_images.empty()) {
      out.test = load_idx(d.test_images, d.test_labels, train.num_classes());
      out.clean_train = std::move(train);
    } else {
      auto parts = split(train, d.split);
      out.clean_train = std::move(parts.train);
      out.test = std::move(parts.test);
    }
  }
  if (out.test.empty()) throw std::invalid_argument("experiment needs a non-empty test set (test_fraction > 0)");

  const auto& n = cfg.noise;
  std::optional<FeatureMatrix> idx_source;
  if (n.kind == NoiseKind::OpenSet && n.openset_source == DatasetConfig::Source::Idx)
    idx_source = load_idx_images(n.openset_images);
  std::optional<SemanticEnsemble> semantic;
  if (n.kind == NoiseKind::Semantic && noisy_count(out.clean_train.size(), n.ratio) > 0) {
    TrainConfig t = cfg.defaults;
    t.total_epochs = std::max(2, n.ensemble_epochs);
    t.warmup_epochs = 1;
    semantic = semantic_ensemble(out.clean_train, n.ensemble, t, n.seed);
  }

  for (int r = 0; r < cfg.repeats; ++r) {
    const std::uint64_t seed = cfg.noise.kind == NoiseKind::Semantic
                                   ? n.seed
                                   : derive_seed(n.seed, {static_cast<std::uint64_t>(r)});
    switch (n.kind) {
      case NoiseKind::Sym: out.noisy_train.push_back(apply_sym(out.clean_train, n.ratio, seed)); break;
      case NoiseKind::Asym: out.noisy_train.push_back(apply_asym(out.clean_train, n.ratio, seed)); break;
      case NoiseKind::Semantic:
        out.noisy_train.push_back(semantic ? apply_semantic_from(out.clean_train, *semantic, n.ratio)
                                           : out.clean_train);
        break;
      case NoiseKind::OpenSet: {
        if (idx_source) {
          out.noisy_train.push_back(apply_openset(out.clean_train, *idx_source, n.ratio, seed));
          break;
        }
        if (d.source != DatasetConfig::Source::Synthetic)
          throw std::invalid_argument("open-set noise on idx data needs source = idx and source_images");
        ClusterSpec ood = d.clusters;
        ood.first_axis = d.clusters.classes;
        ood.per_class = static_cast<int>((out.clean_train.size() + static_cast<std::size_t>(ood.classes) - 1) /
                                         static_cast<std::size_t>(ood.classes));
        ood.seed = derive_seed(seed, {7});
        if (ood.dim < 2 * ood.classes)
          throw std::invalid_argument("synthetic open-set source needs dim >= 2 * classes");
        out.noisy_train.push_back(apply_openset(out.clean_train, synth_clusters(ood).features(), n.ratio, seed));
        break;
      }
    }
  }
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_summary(std::ostream& os, const std::vector<MethodResult>& methods, const std::string& prefix = {}) {
  for (const auto& m : methods) {
    const auto& s = m.summary;
    os << prefix << m.label << ',' << s.runs << ',' << fmt_fixed(s.final_accuracy.mean) << ','
       << fmt_fixed(s.final_accuracy.stddev) << ',' << fmt_fixed(s.peak_accuracy.mean) << ','
       << fmt_fixed(s.peak_accuracy.stddev) << ',' << fmt_fixed(s.final_precision.mean) << ','
       << fmt_fixed(s.final_recall.mean) << '\n';
  }
}

constexpr const char* kSummaryHeader =
    "method,runs,final_acc_mean,final_acc_std,peak_acc_mean,peak_acc_std,final_precision_mean,final_recall_mean";

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, prepare_data(cfg)); }

ExperimentResult run_experiment(const ExperimentConfig& cfg, const PreparedData& data) {
  if (cfg.methods.empty()) throw std::invalid_argument("experiment has no methods");
  if (static_cast<int>(data.noisy_train.size()) != cfg.repeats)
    throw std::invalid_argument("prepared data does not match the repeat count");
  fs::create_directories(cfg.output);
  write_file(cfg.output / "manifest.txt", render_manifest(cfg));
  for (int r = 0; r < cfg.repeats; ++r) {
    std::ostringstream os;
    write_label_table(os, data.noisy_train[static_cast<std::size_t>(r)]);
    write_file(cfg.output / ("labels_r" + std::to_string(r) + ".csv"), os.str());
  }

  struct Job {
    std::size_t method;
    int repeat;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m)
    for (int r = 0; r < cfg.repeats; ++r) jobs.push_back({m, r});
  std::vector<RunLog> logs(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      try {
        const auto& entry = cfg.methods[jobs[j].method];
        const int r = jobs[j].repeat;
        TrainConfig t = entry.train;
        const auto seeds = repeat_seeds(cfg, entry, r);
        t.init_seed = seeds.init;
        t.shuffle_seed = seeds.shuffle;
        t.dropout_seed = seeds.dropout;
        const std::string stem = entry.label + "_r" + std::to_string(r);
        std::ostringstream used;
        TrainHooks hooks;
        if (cfg.dump_selections) hooks.on_epoch_used = [&used](const SelectionSet& s) { write_selection(used, s); };
        logs[j] = train(data.noisy_train[static_cast<std::size_t>(r)], data.test, t, hooks);
        logs[j].method = entry.label;
        std::ostringstream csv;
        write_run_csv(csv, logs[j]);
        write_file(cfg.output / (stem + ".csv"), csv.str());
        if (cfg.dump_selections) write_file(cfg.output / (stem + "_used.csv"), "epoch,id\n" + used.str());
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, std::min<int>(cfg.threads, static_cast<int>(jobs.size()))));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentResult result;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    MethodResult mr{cfg.methods[m].label, {}, {}};
    for (std::size_t j = 0; j < jobs.size(); ++j)
      if (jobs[j].method == m) mr.runs.push_back(std::move(logs[j]));
    mr.summary = aggregate(mr.runs);
    result.methods.push_back(std::move(mr));
  }
  std::ostringstream summary;
  summary << kSummaryHeader << '\n';
  write_summary(summary, result.methods);
  write_file(cfg.output / "summary.csv", summary.str());
  return result;
}

std::vector<SweepPoint> sweep(const ExperimentConfig& cfg, SweepParam param, std::vector<std::string> grid) {
  const double ratio = cfg.noise.ratio;
  if (grid.empty()) {
    if (param == SweepParam::EnsembleSize)
      grid = {"1", "3", "5", "inf"};
    else
      grid = {fmt_double(ratio * 9.0 / 10.0), fmt_double(ratio), fmt_double(ratio * 11.0 / 10.0)};
  }
  const std::string name = param == SweepParam::EnsembleSize ? "M" : "eps";
  const std::string source = "--grid";

  std::vector<ExperimentConfig> configs;
  for (const auto& value : grid) {
    ExperimentConfig c = cfg;
    const Line line{source, 0};
    for (auto& m : c.methods) {
      if (param == SweepParam::EnsembleSize) {
        m.train.ensemble = line.ensemble(value);
      } else {
        m.train.assumed_noise = line.real(value);
      }
      try {
        m.train.validate();
      } catch (const std::invalid_argument& ex) {
        line.fail(name + "=" + value + ": " + ex.what());
      }
    }
    c.output = cfg.output / (name + "_" + value);
    configs.push_back(std::move(c));
  }

  const PreparedData data = prepare_data(cfg);
  fs::create_directories(cfg.output);
  write_file(cfg.output / "manifest.txt", render_manifest(cfg));
  std::vector<SweepPoint> points;
  std::ostringstream summary;
  summary << "param,value," << kSummaryHeader << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    points.push_back({grid[i], run_experiment(configs[i], data)});
    write_summary(summary, points.back().result.methods, name + "," + grid[i] + ",");
  }
  write_file(cfg.output / "sweep_summary.csv", summary.str());
  return points;
}

}  // namespace lec
