#pragma once

// Synthetic annotation noise: symmetric and asymmetric label flips, open-set
// feature substitution, and semantic flips of the examples an ensemble of
// clean-trained networks disagrees on most.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lec/dataset.hpp"
#include "lec/trainers.hpp"

namespace lec {

enum class NoiseKind { Sym, Asym, OpenSet, Semantic };

std::string_view noise_kind_name(NoiseKind k);
std::optional<NoiseKind> parse_noise_kind(std::string_view name);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Sym;
  double ratio = 0.0;  // percent, in [0,100)
  std::uint64_t seed = 0;
  const FeatureMatrix* openset_source = nullptr;  // required for OpenSet
  int ensemble_size = 5;                          // Semantic only
  TrainConfig ensemble_training{};                // Semantic only
};

/// floor(ratio * n / 100)
std::size_t noisy_count(std::size_t n, double ratio);

/// Corrupted examples are picked per true class (largest-remainder quotas, then
/// uniformly inside the class) so every class loses its share of the total.
/// Symmetric noise also spreads each class's flips evenly over the other labels.
LabeledDataset apply_sym(const LabeledDataset& clean, double ratio, std::uint64_t seed);
LabeledDataset apply_asym(const LabeledDataset& clean, double ratio, std::uint64_t seed);
LabeledDataset apply_openset(const LabeledDataset& clean, const FeatureMatrix& source, double ratio,
                             std::uint64_t seed);

/// sum_n KL(p_n || mean_m p_m) per row, for N probability matrices of equal shape.
Eigen::VectorXd ensemble_disagreement(std::span<const Eigen::MatrixXd> probabilities);

struct SemanticEnsemble {
  Eigen::VectorXd uncertainty;     // per example
  Eigen::MatrixXd mean_probability;  // n x C
};

/// Trains `members` networks with independent seeds on the clean data and scores
/// each example by their disagreement.
SemanticEnsemble semantic_ensemble(const LabeledDataset& clean, int members, const TrainConfig& training,
                                   std::uint64_t seed);
Eigen::VectorXd semantic_uncertainty(const LabeledDataset& clean, int members, const TrainConfig& training,
                                     std::uint64_t seed = 0);

/// Flips the floor(ratio*n/100) most uncertain examples (ties to the lower id)
/// to their most probable wrong class under the ensemble mean.
LabeledDataset apply_semantic_from(const LabeledDataset& clean, const SemanticEnsemble& ensemble, double ratio);
LabeledDataset apply_semantic(const LabeledDataset& clean, double ratio, int members, std::uint64_t seed,
                              const TrainConfig& training);

LabeledDataset apply_noise(const LabeledDataset& clean, const NoiseSpec& spec);

using CorruptionMatrix = Eigen::MatrixXd;

/// Row j, column i: fraction of true-class-j examples observed as class i.
/// A class with no examples gets a one-hot diagonal row.
CorruptionMatrix corruption_matrix(const LabeledDataset& dataset);

}  // namespace lec
