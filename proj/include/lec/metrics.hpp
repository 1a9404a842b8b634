#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lec/dataset.hpp"
#include "lec/model.hpp"

namespace lec {

/// Metrics measured at the end of one epoch. Label precision is undefined
/// (nullopt) for an epoch that trained on nothing.
struct EpochMetrics {
  int epoch = 0;
  double test_accuracy = 0.0;
  std::optional<double> label_precision;
  double recall = 0.0;
  std::size_t used_count = 0;
  std::size_t skipped_updates = 0;
  /// Precision of the union of the raw small-loss sets before consensus.
  /// Only filtering methods set it.
  std::optional<double> small_loss_precision;
};

/// Clean fraction of the ids used for training. Unknown ids throw.
std::optional<double> label_precision(std::span<const ExampleId> used, const LabeledDataset& train);

/// Fraction of all clean training examples that were used.
double recall(std::span<const ExampleId> used, const LabeledDataset& train);

/// Fraction of test rows whose argmax prediction equals the true label.
template <typename Scalar>
double test_accuracy(const ModelState<Scalar>& model, const LabeledDataset& test) {
  if (test.empty()) return 0.0;
  const Matrix<Scalar> probs = forward(model, test.features(), ForwardMode::deterministic());
  const auto predicted = argmax_rows(probs);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) correct += predicted[i] == test.truth(i);
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

struct RunLog {
  std::string method;
  std::vector<EpochMetrics> epochs;
  std::vector<std::string> warnings;

  double final_accuracy() const { return epochs.empty() ? 0.0 : epochs.back().test_accuracy; }
  double peak_accuracy() const;
  std::size_t total_skipped() const;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1) convention; 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

struct RunSummary {
  std::size_t runs = 0;
  MeanStd final_accuracy;
  MeanStd peak_accuracy;
  MeanStd final_precision;  // over runs whose last epoch has a defined precision
  MeanStd final_recall;
  std::vector<MeanStd> accuracy_curve;  // per epoch
  std::vector<MeanStd> recall_curve;
};

/// Runs must have equal epoch counts.
RunSummary aggregate(std::span<const RunLog> runs);

/// Least-squares slope of `values` against their index.
double regression_slope(std::span<const double> values);

}  // namespace lec
