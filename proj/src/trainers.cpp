#include "lec/trainers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>
#include <stdexcept>

#include "lec/random.hpp"

namespace lec {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Standard: return "Standard";
    case Method::SelfTraining: return "SelfTraining";
    case Method::LNEC: return "LNEC";
    case Method::LSEC: return "LSEC";
    case Method::LTEC: return "LTEC";
    case Method::LTECFull: return "LTECFull";
    case Method::CoTeaching: return "CoTeaching";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  std::string key;
  for (char c : name)
    if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "standard") return Method::Standard;
  if (key == "selftraining" || key == "self") return Method::SelfTraining;
  if (key == "lnec") return Method::LNEC;
  if (key == "lsec") return Method::LSEC;
  if (key == "ltec") return Method::LTEC;
  if (key == "ltecfull") return Method::LTECFull;
  if (key == "coteaching") return Method::CoTeaching;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (warmup_epochs < 1 || warmup_epochs >= total_epochs)
    throw std::invalid_argument("need 1 <= warmup_epochs < total_epochs (got " + std::to_string(warmup_epochs) + ", " +
                                std::to_string(total_epochs) + ")");
  if (!(assumed_noise >= 0.0 && assumed_noise < 100.0))
    throw std::invalid_argument("assumed noise ratio must lie in [0,100)");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0,1)");
  for (Index h : hidden)
    if (h < 1) throw std::invalid_argument("hidden widths must be positive");
}

MlpShape TrainConfig::shape(Index inputs, int classes) const { return {inputs, hidden, classes, dropout}; }

double coteaching_keep_percent(double assumed_noise, int epoch) {
  return 100.0 - assumed_noise * static_cast<double>(std::min(epoch, 10)) / 10.0;
}

namespace {

// Observed labels and float features of the training set, gathered per batch.
struct TrainingSet {
  const LabeledDataset& data;
  Matrix<float> features;

  explicit TrainingSet(const LabeledDataset& d) : data(d), features(d.features().cast<float>()) {}

  std::size_t size() const { return data.size(); }

  Matrix<float> rows(std::span<const std::size_t> r) const {
    std::vector<Index> idx(r.begin(), r.end());
    return features(idx, Eigen::all);
  }
  std::vector<int> labels(std::span<const std::size_t> r) const {
    std::vector<int> y;
    y.reserve(r.size());
    for (std::size_t i : r) y.push_back(data.observed(i));
    return y;
  }
  std::vector<ExampleId> ids(std::span<const std::size_t> r) const {
    std::vector<ExampleId> out;
    out.reserve(r.size());
    for (std::size_t i : r) out.push_back(data.id(i));
    return out;
  }
  std::vector<std::size_t> rows_of(const SelectionSet& s) const {
    std::vector<std::size_t> out;
    out.reserve(s.size());
    for (ExampleId id : s.ids) out.push_back(data.require_row(id));
    return out;
  }
};

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<std::vector<std::size_t>> chunk(const std::vector<std::size_t>& order, int batch_size) {
  std::vector<std::vector<std::size_t>> out;
  const auto b = static_cast<std::size_t>(batch_size);
  for (std::size_t s = 0; s < order.size(); s += b)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(s),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), s + b)));
  return out;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, const TrainConfig& cfg, int epoch) {
  return chunk(shuffled(n, derive_seed(cfg.shuffle_seed, {static_cast<std::uint64_t>(epoch)})), cfg.batch_size);
}

std::uint64_t member_stream(const TrainConfig& cfg, int member) {
  return cfg.independent_members ? static_cast<std::uint64_t>(member) : 0;
}

Net init_member(const TrainConfig& cfg, const TrainingSet& ts, int member) {
  return make_model<float>(cfg.shape(ts.data.dim(), ts.data.num_classes()),
                           derive_seed(cfg.init_seed, {member_stream(cfg, member)}));
}

// Dropout masks of the update pass for (member, epoch, batch).
ForwardMode step_mode(const TrainConfig& cfg, int member, int epoch, int batch) {
  return ForwardMode::stochastic(derive_seed(cfg.dropout_seed, {member_stream(cfg, member),
                                                                static_cast<std::uint64_t>(epoch),
                                                                static_cast<std::uint64_t>(batch), 0}));
}

bool update(Net& net, const TrainingSet& ts, std::span<const std::size_t> rows, const TrainConfig& cfg, int member,
            int epoch, int batch) {
  const auto y = ts.labels(rows);
  return sgd_step(net, ts.rows(rows), y, cfg.learning_rate, step_mode(cfg, member, epoch, batch)) ==
         StepStatus::Applied;
}

std::vector<double> deterministic_losses(const Net& net, const Matrix<float>& x, std::span<const int> y) {
  const LossVector<float> l = per_example_loss(net, x, y, ForwardMode::deterministic());
  return {l.data(), l.data() + l.size()};
}

std::vector<double> full_losses(const Net& net, const TrainingSet& ts) {
  std::vector<double> out;
  out.reserve(ts.size());
  constexpr std::size_t kChunk = 4096;
  for (std::size_t s = 0; s < ts.size(); s += kChunk) {
    std::vector<std::size_t> r(std::min(kChunk, ts.size() - s));
    std::iota(r.begin(), r.end(), s);
    const auto y = ts.labels(r);
    const auto l = deterministic_losses(net, ts.rows(r), y);
    out.insert(out.end(), l.begin(), l.end());
  }
  return out;
}

// Rows touched during an epoch, counted once each.
class Usage {
 public:
  explicit Usage(std::size_t n) : flags_(n, 0) {}
  void mark(std::span<const std::size_t> rows) {
    for (std::size_t r : rows) flags_[r] = 1;
  }
  SelectionSet ids(const LabeledDataset& d, int epoch) const {
    SelectionSet s{{}, Scope::FullBatch, epoch};
    for (std::size_t r = 0; r < flags_.size(); ++r)
      if (flags_[r]) s.ids.push_back(d.id(r));
    std::sort(s.ids.begin(), s.ids.end());
    return s;
  }

 private:
  std::vector<std::uint8_t> flags_;
};

struct EpochRecord {
  double accuracy = 0.0;
  std::optional<double> precision;
  double recall = 0.0;
  std::size_t used = 0;
};

EpochRecord measure(const Net& net, const LabeledDataset& train, const LabeledDataset& test, const SelectionSet& used) {
  return {test_accuracy(net, test), label_precision(used.ids, train), recall(used.ids, train), used.size()};
}

// Arithmetic mean over networks; precision mean only over networks that trained.
EpochMetrics average(int epoch, std::span<const EpochRecord> per_net, std::size_t skipped) {
  EpochMetrics m;
  m.epoch = epoch;
  m.skipped_updates = skipped;
  double acc = 0.0, rec = 0.0, prec = 0.0, used = 0.0;
  std::size_t defined = 0;
  for (const auto& r : per_net) {
    acc += r.accuracy;
    rec += r.recall;
    used += static_cast<double>(r.used);
    if (r.precision) {
      prec += *r.precision;
      ++defined;
    }
  }
  const double k = static_cast<double>(per_net.size());
  m.test_accuracy = acc / k;
  m.recall = rec / k;
  m.used_count = static_cast<std::size_t>(used / k + 0.5);
  if (defined > 0) m.label_precision = prec / static_cast<double>(defined);
  return m;
}

void notify(const TrainHooks& hooks, const SelectionSet& used) {
  if (hooks.on_epoch_used) hooks.on_epoch_used(used);
}

SelectionSet select_rows(const TrainingSet& ts, const std::vector<double>& losses, std::span<const std::size_t> rows,
                         double eps, int epoch) {
  const auto ids = ts.ids(rows);
  return small_loss_select(losses, ids, eps, Scope::MiniBatch, epoch);
}

RunLog run_standard(const LabeledDataset& train, const LabeledDataset* test, const TrainConfig& cfg,
                    const TrainHooks& hooks, Net* out) {
  cfg.validate();
  const TrainingSet ts(train);
  Net net = init_member(cfg, ts, 0);
  RunLog log{std::string(method_name(Method::Standard)), {}, {}};
  for (int t = 1; t <= cfg.total_epochs; ++t) {
    const auto batches = epoch_batches(ts.size(), cfg, t);
    Usage usage(ts.size());
    for (std::size_t b = 0; b < batches.size(); ++b)
      if (update(net, ts, batches[b], cfg, 0, t, static_cast<int>(b))) usage.mark(batches[b]);
    if (test) {
      const auto used = usage.ids(train, t);
      const EpochRecord r = measure(net, train, *test, used);
      log.epochs.push_back(average(t, {&r, 1}, 0));
      notify(hooks, used);
    }
  }
  if (out) *out = std::move(net);
  return log;
}

}  // namespace

RunLog train_standard(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                      const TrainHooks& hooks) {
  return run_standard(train, &test, cfg, hooks, nullptr);
}

Net fit_standard(const LabeledDataset& train, const TrainConfig& cfg) {
  Net net;
  run_standard(train, nullptr, cfg, {}, &net);
  return net;
}

RunLog train_lec(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                 const PerturbedLoss& perturbed, std::string name, const TrainHooks& hooks) {
  cfg.validate();
  if (cfg.ensemble.is_unbounded()) throw std::invalid_argument(name + " needs a finite ensemble size");
  const int members = static_cast<int>(cfg.ensemble.value());
  const TrainingSet ts(train);
  Net net = init_member(cfg, ts, 0);
  RunLog log{std::move(name), {}, {}};

  for (int t = 1; t <= cfg.total_epochs; ++t) {
    const bool filtering = t > cfg.warmup_epochs;
    const auto batches = epoch_batches(ts.size(), cfg, t);
    Usage usage(ts.size()), small(ts.size());
    std::size_t skipped = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const int bi = static_cast<int>(b);
      if (!filtering) {
        if (update(net, ts, batches[b], cfg, 0, t, bi)) usage.mark(batches[b]);
        continue;
      }
      const Matrix<float> x = ts.rows(batches[b]);
      const auto y = ts.labels(batches[b]);
      std::vector<SelectionSet> sets;
      sets.reserve(static_cast<std::size_t>(members));
      for (int m = 0; m < members; ++m)
        sets.push_back(select_rows(ts, perturbed(net, x, y, m, t, bi), batches[b], cfg.assumed_noise, t));
      small.mark(ts.rows_of(sets.front()));
      const auto agreed = ts.rows_of(consensus(sets, cfg.ensemble));
      if (agreed.empty()) {
        ++skipped;
        continue;
      }
      if (update(net, ts, agreed, cfg, 0, t, bi)) usage.mark(agreed);
    }
    const auto used = usage.ids(train, t);
    const EpochRecord r = measure(net, train, test, used);
    EpochMetrics m = average(t, {&r, 1}, skipped);
    if (filtering) m.small_loss_precision = label_precision(small.ids(train, t).ids, train);
    log.epochs.push_back(m);
    notify(hooks, used);
  }
  return log;
}

RunLog train_self(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  TrainConfig c = cfg;
  c.ensemble = EnsembleSize(1);
  return train_lec(
      train, test, c,
      [](const Net& net, const Matrix<float>& x, std::span<const int> y, int, int, int) {
        return deterministic_losses(net, x, y);
      },
      std::string(method_name(Method::SelfTraining)), hooks);
}

RunLog train_lsec(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  const std::uint64_t seed = cfg.dropout_seed;
  RunLog log = train_lec(
      train, test, cfg,
      [seed](const Net& net, const Matrix<float>& x, std::span<const int> y, int member, int epoch, int batch) {
        const auto mode = ForwardMode::stochastic(derive_seed(
            seed, {0, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(batch),
                   1 + static_cast<std::uint64_t>(member)}));
        const LossVector<float> l = per_example_loss(net, x, y, mode);
        return std::vector<double>(l.data(), l.data() + l.size());
      },
      std::string(method_name(Method::LSEC)), hooks);
  if (cfg.dropout == 0.0 && !cfg.ensemble.is_unbounded() && cfg.ensemble.value() > 1)
    log.warnings.push_back("LSEC with dropout 0: stochastic passes coincide, consensus equals a single small-loss set");
  return log;
}

RunLog train_lnec(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  if (cfg.ensemble.is_unbounded()) throw std::invalid_argument("LNEC needs a finite ensemble size");
  const int members = static_cast<int>(cfg.ensemble.value());
  const TrainingSet ts(train);
  std::vector<Net> nets;
  for (int m = 0; m < members; ++m) nets.push_back(init_member(cfg, ts, m));
  RunLog log{std::string(method_name(Method::LNEC)), {}, {}};

  for (int t = 1; t <= cfg.total_epochs; ++t) {
    const bool filtering = t > cfg.warmup_epochs;
    const auto batches = epoch_batches(ts.size(), cfg, t);
    Usage usage(ts.size()), small(ts.size());
    std::size_t skipped = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const int bi = static_cast<int>(b);
      std::vector<std::size_t> rows = batches[b];
      if (filtering) {
        const Matrix<float> x = ts.rows(rows);
        const auto y = ts.labels(rows);
        std::vector<SelectionSet> sets;
        for (const auto& net : nets) sets.push_back(select_rows(ts, deterministic_losses(net, x, y), rows, cfg.assumed_noise, t));
        small.mark(ts.rows_of(sets.front()));
        rows = ts.rows_of(consensus(sets, cfg.ensemble));
        if (rows.empty()) {
          ++skipped;
          continue;
        }
      }
      for (int m = 0; m < members; ++m) (void)update(nets[static_cast<std::size_t>(m)], ts, rows, cfg, m, t, bi);
      usage.mark(rows);
    }
    const auto used = usage.ids(train, t);
    std::vector<EpochRecord> per_net;
    for (const auto& net : nets) per_net.push_back(measure(net, train, test, used));
    EpochMetrics m = average(t, per_net, skipped);
    if (filtering) m.small_loss_precision = label_precision(small.ids(train, t).ids, train);
    log.epochs.push_back(m);
    notify(hooks, used);
  }
  return log;
}

RunLog train_ltec(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  const TrainingSet ts(train);
  Net net = init_member(cfg, ts, 0);
  TemporalPool pool(cfg.ensemble);
  RunLog log{std::string(method_name(Method::LTEC)), {}, {}};

  for (int t = 1; t <= cfg.total_epochs; ++t) {
    const bool filtering = t > cfg.warmup_epochs;
    const auto batches = epoch_batches(ts.size(), cfg, t);
    Usage usage(ts.size());
    SelectionSet epoch_pool{{}, Scope::FullBatch, t};
    std::size_t skipped = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const int bi = static_cast<int>(b);
      const auto& rows = batches[b];
      const Matrix<float> x = ts.rows(rows);
      const auto y = ts.labels(rows);
      const SelectionSet current = select_rows(ts, deterministic_losses(net, x, y), rows, cfg.assumed_noise, t);
      epoch_pool = set_union(epoch_pool, current);
      if (!filtering) {
        if (update(net, ts, rows, cfg, 0, t, bi)) usage.mark(rows);
        continue;
      }
      const auto agreed = ts.rows_of(temporal_consensus(pool, current, cfg.ensemble, t));
      if (agreed.empty()) {
        ++skipped;
        continue;
      }
      if (update(net, ts, agreed, cfg, 0, t, bi)) usage.mark(agreed);
    }
    const auto used = usage.ids(train, t);
    const EpochRecord r = measure(net, train, test, used);
    EpochMetrics m = average(t, {&r, 1}, skipped);
    if (filtering) m.small_loss_precision = label_precision(epoch_pool.ids, train);
    log.epochs.push_back(m);
    notify(hooks, used);
    pool.push(std::move(epoch_pool));
  }
  return log;
}

RunLog train_ltec_full(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                       const TrainHooks& hooks) {
  cfg.validate();
  const TrainingSet ts(train);
  Net net = init_member(cfg, ts, 0);
  TemporalPool pool(cfg.ensemble);
  RunLog log{std::string(method_name(Method::LTECFull)), {}, {}};
  std::vector<std::size_t> all_rows(ts.size());
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
  const auto all_ids = ts.ids(all_rows);

  for (int t = 1; t <= cfg.total_epochs; ++t) {
    const bool filtering = t > cfg.warmup_epochs;
    Usage usage(ts.size());
    std::size_t skipped = 0;
    std::optional<SelectionSet> current;
    // Selections start at epoch 2, once the network has seen one pass.
    if (t >= 2) current = small_loss_select(full_losses(net, ts), all_ids, cfg.assumed_noise, Scope::FullBatch, t);

    std::vector<std::vector<std::size_t>> batches;
    if (!filtering) {
      batches = epoch_batches(ts.size(), cfg, t);
    } else {
      const auto agreed = ts.rows_of(temporal_consensus(pool, *current, cfg.ensemble, t));
      if (agreed.empty()) {
        ++skipped;
      } else {
        std::vector<std::size_t> order = shuffled(agreed.size(), derive_seed(cfg.shuffle_seed, {static_cast<std::uint64_t>(t)}));
        for (auto& o : order) o = agreed[o];
        batches = chunk(order, cfg.batch_size);
      }
    }
    for (std::size_t b = 0; b < batches.size(); ++b)
      if (update(net, ts, batches[b], cfg, 0, t, static_cast<int>(b))) usage.mark(batches[b]);

    const auto used = usage.ids(train, t);
    const EpochRecord r = measure(net, train, test, used);
    EpochMetrics m = average(t, {&r, 1}, skipped);
    if (filtering) m.small_loss_precision = label_precision(current->ids, train);
    log.epochs.push_back(m);
    notify(hooks, used);
    if (current) pool.push(std::move(*current));
  }
  return log;
}

RunLog train_coteaching(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                        const TrainHooks& hooks) {
  cfg.validate();
  const TrainingSet ts(train);
  std::array<Net, 2> nets{init_member(cfg, ts, 0), init_member(cfg, ts, 1)};
  RunLog log{std::string(method_name(Method::CoTeaching)), {}, {}};

  for (int t = 1; t <= cfg.total_epochs; ++t) {
    const double drop = 100.0 - coteaching_keep_percent(cfg.assumed_noise, t);
    const auto batches = epoch_batches(ts.size(), cfg, t);
    std::array<Usage, 2> usage{Usage(ts.size()), Usage(ts.size())};
    std::size_t skipped = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const int bi = static_cast<int>(b);
      const auto& rows = batches[b];
      const Matrix<float> x = ts.rows(rows);
      const auto y = ts.labels(rows);
      std::array<std::vector<std::size_t>, 2> picked;
      for (std::size_t k = 0; k < 2; ++k)
        picked[k] = ts.rows_of(select_rows(ts, deterministic_losses(nets[k], x, y), rows, drop, t));
      // Each network trains on its peer's small-loss examples.
      for (std::size_t k = 0; k < 2; ++k) {
        const auto& peer = picked[1 - k];
        if (peer.empty()) {
          ++skipped;
          continue;
        }
        if (update(nets[k], ts, peer, cfg, static_cast<int>(k), t, bi)) usage[k].mark(peer);
      }
    }
    std::array<EpochRecord, 2> per_net;
    for (std::size_t k = 0; k < 2; ++k) {
      const auto used = usage[k].ids(train, t);
      per_net[k] = measure(nets[k], train, test, used);
      notify(hooks, used);
    }
    log.epochs.push_back(average(t, per_net, skipped));
  }
  return log;
}

RunLog train(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
             const TrainHooks& hooks) {
  switch (cfg.method) {
    case Method::Standard: return train_standard(train, test, cfg, hooks);
    case Method::SelfTraining: return train_self(train, test, cfg, hooks);
    case Method::LNEC: return train_lnec(train, test, cfg, hooks);
    case Method::LSEC: return train_lsec(train, test, cfg, hooks);
    case Method::LTEC: return train_ltec(train, test, cfg, hooks);
    case Method::LTECFull: return train_ltec_full(train, test, cfg, hooks);
    case Method::CoTeaching: return train_coteaching(train, test, cfg, hooks);
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace lec
