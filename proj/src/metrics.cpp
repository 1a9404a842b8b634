#include "lec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lec {

namespace {

std::size_t count_clean(std::span<const ExampleId> used, const LabeledDataset& train) {
  std::size_t clean = 0;
  for (ExampleId id : used) clean += !train.is_noisy(train.require_row(id));
  return clean;
}

}  // namespace

std::optional<double> label_precision(std::span<const ExampleId> used, const LabeledDataset& train) {
  const std::size_t clean = count_clean(used, train);
  if (used.empty()) return std::nullopt;
  return static_cast<double>(clean) / static_cast<double>(used.size());
}

double recall(std::span<const ExampleId> used, const LabeledDataset& train) {
  const std::size_t clean = count_clean(used, train);
  const std::size_t all_clean = train.clean_count();
  return all_clean == 0 ? 0.0 : static_cast<double>(clean) / static_cast<double>(all_clean);
}

double RunLog::peak_accuracy() const {
  double best = 0.0;
  for (const auto& e : epochs) best = std::max(best, e.test_accuracy);
  return best;
}

std::size_t RunLog::total_skipped() const {
  std::size_t k = 0;
  for (const auto& e : epochs) k += e.skipped_updates;
  return k;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

RunSummary aggregate(std::span<const RunLog> runs) {
  RunSummary s;
  s.runs = runs.size();
  if (runs.empty()) return s;
  const std::size_t epochs = runs.front().epochs.size();
  for (const auto& r : runs)
    if (r.epochs.size() != epochs) throw std::invalid_argument("aggregate: runs have different epoch counts");

  std::vector<double> finals, peaks, precisions, recalls;
  for (const auto& r : runs) {
    finals.push_back(r.final_accuracy());
    peaks.push_back(r.peak_accuracy());
    if (!r.epochs.empty()) {
      if (r.epochs.back().label_precision) precisions.push_back(*r.epochs.back().label_precision);
      recalls.push_back(r.epochs.back().recall);
    }
  }
  // Sorting makes the floating-point sums independent of run order.
  for (auto* v : {&finals, &peaks, &precisions, &recalls}) std::sort(v->begin(), v->end());
  s.final_accuracy = mean_std(finals);
  s.peak_accuracy = mean_std(peaks);
  s.final_precision = mean_std(precisions);
  s.final_recall = mean_std(recalls);

  for (std::size_t e = 0; e < epochs; ++e) {
    std::vector<double> acc, rec;
    for (const auto& r : runs) {
      acc.push_back(r.epochs[e].test_accuracy);
      rec.push_back(r.epochs[e].recall);
    }
    std::sort(acc.begin(), acc.end());
    std::sort(rec.begin(), rec.end());
    s.accuracy_curve.push_back(mean_std(acc));
    s.recall_curve.push_back(mean_std(rec));
  }
  return s;
}

double regression_slope(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double xbar = (static_cast<double>(n) - 1.0) / 2.0;
  const double ybar = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - xbar;
    sxy += dx * (values[i] - ybar);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace lec
