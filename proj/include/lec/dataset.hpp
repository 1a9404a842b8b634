#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace lec {

using ExampleId = std::int64_t;
using FeatureMatrix = Eigen::MatrixXd;

/// Training or test examples with their hidden ground truth.
///
/// Noise is represented structurally: an example is noisy when its observed
/// label differs from its true label, or when its features were substituted by
/// an out-of-distribution source. Instances are immutable; corruption produces
/// a new dataset.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(std::vector<ExampleId> ids, FeatureMatrix features, std::vector<int> observed,
                 std::vector<int> truth, std::vector<std::uint8_t> substituted, int num_classes);

  /// Uncorrupted dataset: observed == true labels, nothing substituted.
  static LabeledDataset clean(std::vector<ExampleId> ids, FeatureMatrix features, std::vector<int> labels,
                              int num_classes);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  int num_classes() const { return num_classes_; }
  Eigen::Index dim() const { return features_.cols(); }

  const std::vector<ExampleId>& ids() const { return ids_; }
  const FeatureMatrix& features() const { return features_; }
  const std::vector<int>& observed() const { return observed_; }
  const std::vector<int>& truth() const { return truth_; }

  ExampleId id(std::size_t row) const { return ids_[row]; }
  int observed(std::size_t row) const { return observed_[row]; }
  int truth(std::size_t row) const { return truth_[row]; }
  bool is_substituted(std::size_t row) const { return substituted_[row] != 0; }
  bool is_noisy(std::size_t row) const { return observed_[row] != truth_[row] || substituted_[row] != 0; }

  std::size_t noisy_count() const;
  std::size_t clean_count() const { return size() - noisy_count(); }
  bool is_clean() const { return noisy_count() == 0; }

  std::optional<std::size_t> row_of(ExampleId id) const;
  /// Row of `id`; throws std::out_of_range for unknown ids.
  std::size_t require_row(ExampleId id) const;

  LabeledDataset with_observed(std::vector<int> observed) const;
  LabeledDataset with_substitutions(FeatureMatrix features, std::vector<std::uint8_t> substituted) const;
  LabeledDataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<ExampleId> ids_;
  FeatureMatrix features_;
  std::vector<int> observed_;
  std::vector<int> truth_;
  std::vector<std::uint8_t> substituted_;
  int num_classes_ = 0;
  std::unordered_map<ExampleId, std::size_t> row_index_;
};

// ---------------------------------------------------------------------------
// IDX ingestion (big-endian; labels magic 0x00000801, images magic 0x00000803)

class IdxError : public std::runtime_error {
 public:
  enum class Kind { Io, BadMagic, Truncated, CountMismatch };
  IdxError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;

/// Pixels are scaled by 1/255. Class count is max(label)+1 unless given.
LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        std::optional<int> num_classes = std::nullopt);

/// Images only, as a feature matrix scaled to [0,1]. Used as an open-set source.
FeatureMatrix load_idx_images(const std::filesystem::path& images);

// ---------------------------------------------------------------------------
// Synthetic Gaussian clusters

/// Class k is N(mean_k, spread^2 I) with mean_k = separation/sqrt(2) * e_{first_axis+k},
/// so every pair of class means is exactly `separation` apart.
struct ClusterSpec {
  int classes = 10;
  int per_class = 500;
  int dim = 32;
  double spread = 1.0;
  double separation = 4.0;
  int first_axis = 0;
  std::uint64_t seed = 0;
};

LabeledDataset synth_clusters(const ClusterSpec& spec);
Eigen::MatrixXd cluster_means(const ClusterSpec& spec);

// ---------------------------------------------------------------------------
// Train/test split

struct SplitSpec {
  double train_fraction = 0.8;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct Split {
  LabeledDataset train;
  LabeledDataset test;
};

/// Stratified by true label. Sizes are floor(fraction * n); per-class counts are
/// apportioned by largest remainder so each class is within one example of its
/// share.
Split split(const LabeledDataset& dataset, const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Columnar text format: header `id,true,observed,is_noisy`, one row per example.

void write_label_table(std::ostream& os, const LabeledDataset& dataset);

struct LabelRow {
  ExampleId id;
  int truth;
  int observed;
  bool noisy;
};
std::vector<LabelRow> read_label_table(std::istream& is);

}  // namespace lec
