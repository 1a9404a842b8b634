#pragma once

// Small-loss selection and ensemble-consensus intersection.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "lec/dataset.hpp"

namespace lec {

enum class Scope { MiniBatch, FullBatch };

/// Ids chosen as presumably clean. `ids` is kept sorted ascending and unique.
struct SelectionSet {
  std::vector<ExampleId> ids;
  Scope scope = Scope::MiniBatch;
  int epoch = 0;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
  bool contains(ExampleId id) const;
  friend bool operator==(const SelectionSet&, const SelectionSet&) = default;
};

/// Number of networks (or epochs, or stochastic passes) that must agree.
/// `unbounded()` means every available history entry takes part.
class EnsembleSize {
 public:
  explicit EnsembleSize(std::size_t m) : m_(m) {
    if (m == 0) throw std::invalid_argument("ensemble size must be >= 1");
  }
  static EnsembleSize unbounded() { return EnsembleSize(); }

  bool is_unbounded() const { return m_ == kUnbounded; }
  /// Finite M; throws for the unbounded sentinel.
  std::size_t value() const {
    if (is_unbounded()) throw std::logic_error("unbounded ensemble size has no finite value");
    return m_;
  }
  /// How many preceding entries a temporal ensemble consults: M-1, or all.
  std::size_t history() const { return is_unbounded() ? kUnbounded : m_ - 1; }
  friend bool operator==(const EnsembleSize&, const EnsembleSize&) = default;

 private:
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();
  EnsembleSize() : m_(kUnbounded) {}
  std::size_t m_;
};

/// round-half-up((100 - eps)/100 * n)
std::size_t keep_count(std::size_t n, double noise_percent);

/// The keep_count(n, eps) ids with the smallest loss; ties go to the smaller id.
SelectionSet small_loss_select(std::span<const double> losses, std::span<const ExampleId> ids, double noise_percent,
                               Scope scope = Scope::MiniBatch, int epoch = 0);

/// Exact intersection of 1..M selection sets drawn from the same scope.
SelectionSet consensus(std::span<const SelectionSet> sets, EnsembleSize m);

SelectionSet intersect(const SelectionSet& a, const SelectionSet& b);
SelectionSet set_union(const SelectionSet& a, const SelectionSet& b);

/// Per-epoch selection sets of the preceding epochs. Keeps at most M-1
/// entries (all of them when M is unbounded), evicting the oldest first.
class TemporalPool {
 public:
  explicit TemporalPool(EnsembleSize m) : m_(m) {}

  /// Epoch tags must strictly increase.
  void push(SelectionSet epoch_set);
  const std::deque<SelectionSet>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  EnsembleSize ensemble() const { return m_; }

 private:
  EnsembleSize m_;
  std::deque<SelectionSet> entries_;
};

/// Intersection of `current` with the pool entries of the preceding
/// min(M-1, t-1) epochs. At t = 1, or with an empty pool, returns `current`.
SelectionSet temporal_consensus(const TemporalPool& pool, const SelectionSet& current, EnsembleSize m, int t);

/// One line per id: `epoch,id`. Appends to an open stream so a run can dump
/// every epoch's set into one file.
void write_selection(std::ostream& os, const SelectionSet& set);

}  // namespace lec
