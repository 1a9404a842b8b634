#include "lec/noise.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "apportion.hpp"
#include "lec/random.hpp"

namespace lec {

std::string_view noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::Sym: return "sym";
    case NoiseKind::Asym: return "asym";
    case NoiseKind::OpenSet: return "openset";
    case NoiseKind::Semantic: return "semantic";
  }
  return "?";
}

std::optional<NoiseKind> parse_noise_kind(std::string_view name) {
  std::string key;
  for (char c : name)
    if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "sym") return NoiseKind::Sym;
  if (key == "asym") return NoiseKind::Asym;
  if (key == "openset" || key == "open") return NoiseKind::OpenSet;
  if (key == "semantic") return NoiseKind::Semantic;
  return std::nullopt;
}

std::size_t noisy_count(std::size_t n, double ratio) {
  if (!(ratio >= 0.0 && ratio < 100.0))
    throw std::invalid_argument("noise ratio must lie in [0,100), got " + std::to_string(ratio));
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) / 100.0 + 1e-9));
}

namespace {

void require_clean(const LabeledDataset& d) {
  if (!d.is_clean()) throw std::invalid_argument("noise must be applied to a clean dataset");
}

// `count` rows, stratified by true class, sorted ascending.
std::vector<std::size_t> choose_rows(const LabeledDataset& d, std::size_t count, Rng& rng) {
  const auto classes = static_cast<std::size_t>(d.num_classes());
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < d.size(); ++i) by_class[static_cast<std::size_t>(d.truth(i))].push_back(i);
  std::vector<std::size_t> sizes(classes);
  for (std::size_t k = 0; k < classes; ++k) sizes[k] = by_class[k].size();
  const auto quota = detail::apportion(count, sizes);
  std::vector<std::size_t> rows;
  rows.reserve(count);
  for (std::size_t k = 0; k < classes; ++k) {
    auto& members = by_class[k];
    std::shuffle(members.begin(), members.end(), rng);
    rows.insert(rows.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota[k]));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

template <typename Relabel>
LabeledDataset relabel(const LabeledDataset& clean, double ratio, std::uint64_t seed, Relabel&& f) {
  require_clean(clean);
  const std::size_t count = noisy_count(clean.size(), ratio);
  if (count == 0) return clean;
  Rng rng(seed);
  const auto rows = choose_rows(clean, count, rng);
  std::vector<int> observed = clean.observed();
  for (std::size_t r : rows) observed[r] = f(clean.truth(r), rng);
  return clean.with_observed(std::move(observed));
}

}  // namespace

LabeledDataset apply_sym(const LabeledDataset& clean, double ratio, std::uint64_t seed) {
  require_clean(clean);
  const std::size_t count = noisy_count(clean.size(), ratio);
  if (count == 0) return clean;
  Rng rng(seed);
  const auto rows = choose_rows(clean, count, rng);
  const int classes = clean.num_classes();
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
  for (std::size_t r : rows) by_class[static_cast<std::size_t>(clean.truth(r))].push_back(r);

  // Within a class the flipped rows are spread evenly over the other labels;
  // the labels that receive one extra row are drawn at random.
  std::vector<int> observed = clean.observed();
  for (int k = 0; k < classes; ++k) {
    const auto& members = by_class[static_cast<std::size_t>(k)];
    std::vector<int> others;
    for (int c = 0; c < classes; ++c)
      if (c != k) others.push_back(c);
    std::shuffle(others.begin(), others.end(), rng);
    std::vector<int> targets;
    targets.reserve(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) targets.push_back(others[i % others.size()]);
    std::shuffle(targets.begin(), targets.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i) observed[members[i]] = targets[i];
  }
  return clean.with_observed(std::move(observed));
}

LabeledDataset apply_asym(const LabeledDataset& clean, double ratio, std::uint64_t seed) {
  const int classes = clean.num_classes();
  return relabel(clean, ratio, seed, [classes](int truth, Rng&) { return (truth + 1) % classes; });
}

LabeledDataset apply_openset(const LabeledDataset& clean, const FeatureMatrix& source, double ratio,
                             std::uint64_t seed) {
  require_clean(clean);
  if (source.cols() != clean.dim())
    throw std::invalid_argument("open-set source width " + std::to_string(source.cols()) + " does not match " +
                                std::to_string(clean.dim()));
  const std::size_t count = noisy_count(clean.size(), ratio);
  if (count == 0) return clean;
  if (static_cast<std::size_t>(source.rows()) < count)
    throw std::invalid_argument("open-set source has " + std::to_string(source.rows()) + " rows, need " +
                                std::to_string(count));
  Rng rng(seed);
  const auto rows = choose_rows(clean, count, rng);
  std::vector<std::size_t> picks(static_cast<std::size_t>(source.rows()));
  std::iota(picks.begin(), picks.end(), std::size_t{0});
  std::shuffle(picks.begin(), picks.end(), rng);

  FeatureMatrix features = clean.features();
  std::vector<std::uint8_t> substituted(clean.size(), 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    features.row(static_cast<Eigen::Index>(rows[i])) = source.row(static_cast<Eigen::Index>(picks[i]));
    substituted[rows[i]] = 1;
  }
  return clean.with_substitutions(std::move(features), std::move(substituted));
}

Eigen::VectorXd ensemble_disagreement(std::span<const Eigen::MatrixXd> probabilities) {
  if (probabilities.empty()) throw std::invalid_argument("ensemble_disagreement needs at least one member");
  const auto& first = probabilities.front();
  for (const auto& p : probabilities)
    if (p.rows() != first.rows() || p.cols() != first.cols())
      throw std::invalid_argument("ensemble members disagree on shape");
  const double n = static_cast<double>(probabilities.size());
  // mean = p_1 + sum (p_k - p_1)/N is exactly p_1 when all members agree.
  Eigen::MatrixXd mean = first;
  for (const auto& p : probabilities.subspan(1)) mean += (p - first) / n;

  Eigen::VectorXd u = Eigen::VectorXd::Zero(first.rows());
  for (const auto& p : probabilities)
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index c = 0; c < p.cols(); ++c)
        if (p(i, c) > 0.0) u(i) += p(i, c) * std::log(p(i, c) / mean(i, c));
  return u.cwiseMax(0.0);
}

SemanticEnsemble semantic_ensemble(const LabeledDataset& clean, int members, const TrainConfig& training,
                                   std::uint64_t seed) {
  if (members < 2) throw std::invalid_argument("semantic noise needs an ensemble of at least 2 networks");
  require_clean(clean);
  std::vector<Eigen::MatrixXd> probs;
  for (int m = 0; m < members; ++m) {
    TrainConfig cfg = training;
    cfg.method = Method::Standard;
    const auto tag = static_cast<std::uint64_t>(m);
    cfg.init_seed = derive_seed(seed, {tag, 1});
    cfg.shuffle_seed = derive_seed(seed, {tag, 2});
    cfg.dropout_seed = derive_seed(seed, {tag, 3});
    const Net net = fit_standard(clean, cfg);
    probs.push_back(forward(net, clean.features()).cast<double>());
  }
  SemanticEnsemble e;
  e.uncertainty = ensemble_disagreement(probs);
  e.mean_probability = Eigen::MatrixXd::Zero(probs.front().rows(), probs.front().cols());
  for (const auto& p : probs) e.mean_probability += p;
  e.mean_probability /= static_cast<double>(members);
  return e;
}

Eigen::VectorXd semantic_uncertainty(const LabeledDataset& clean, int members, const TrainConfig& training,
                                     std::uint64_t seed) {
  return semantic_ensemble(clean, members, training, seed).uncertainty;
}

LabeledDataset apply_semantic_from(const LabeledDataset& clean, const SemanticEnsemble& ensemble, double ratio) {
  require_clean(clean);
  const std::size_t count = noisy_count(clean.size(), ratio);
  if (count == 0) return clean;
  if (static_cast<std::size_t>(ensemble.uncertainty.size()) != clean.size())
    throw std::invalid_argument("ensemble scores do not match the dataset");
  std::vector<std::size_t> order(clean.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ua = ensemble.uncertainty(static_cast<Eigen::Index>(a));
    const double ub = ensemble.uncertainty(static_cast<Eigen::Index>(b));
    return ua != ub ? ua > ub : clean.id(a) < clean.id(b);
  });
  std::vector<int> observed = clean.observed();
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t r = order[k];
    const int truth = clean.truth(r);
    int best = -1;
    for (int c = 0; c < clean.num_classes(); ++c) {
      if (c == truth) continue;
      if (best < 0 || ensemble.mean_probability(static_cast<Eigen::Index>(r), c) >
                          ensemble.mean_probability(static_cast<Eigen::Index>(r), best))
        best = c;
    }
    observed[r] = best;
  }
  return clean.with_observed(std::move(observed));
}

LabeledDataset apply_semantic(const LabeledDataset& clean, double ratio, int members, std::uint64_t seed,
                              const TrainConfig& training) {
  require_clean(clean);
  if (noisy_count(clean.size(), ratio) == 0) return clean;
  return apply_semantic_from(clean, semantic_ensemble(clean, members, training, seed), ratio);
}

LabeledDataset apply_noise(const LabeledDataset& clean, const NoiseSpec& spec) {
  switch (spec.kind) {
    case NoiseKind::Sym: return apply_sym(clean, spec.ratio, spec.seed);
    case NoiseKind::Asym: return apply_asym(clean, spec.ratio, spec.seed);
    case NoiseKind::OpenSet:
      if (!spec.openset_source) throw std::invalid_argument("open-set noise needs a source dataset");
      return apply_openset(clean, *spec.openset_source, spec.ratio, spec.seed);
    case NoiseKind::Semantic:
      return apply_semantic(clean, spec.ratio, spec.ensemble_size, spec.seed, spec.ensemble_training);
  }
  throw std::invalid_argument("unknown noise kind");
}

CorruptionMatrix corruption_matrix(const LabeledDataset& dataset) {
  const int c = dataset.num_classes();
  CorruptionMatrix m = CorruptionMatrix::Zero(c, c);
  for (std::size_t i = 0; i < dataset.size(); ++i) m(dataset.truth(i), dataset.observed(i)) += 1.0;
  for (int j = 0; j < c; ++j) {
    const double total = m.row(j).sum();
    if (total == 0.0)
      m(j, j) = 1.0;
    else
      m.row(j) /= total;
  }
  return m;
}

}  // namespace lec
