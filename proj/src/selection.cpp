#include "lec/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

namespace lec {

bool SelectionSet::contains(ExampleId id) const { return std::binary_search(ids.begin(), ids.end(), id); }

std::size_t keep_count(std::size_t n, double noise_percent) {
  if (!(noise_percent >= 0.0 && noise_percent < 100.0))
    throw std::invalid_argument("noise ratio must lie in [0,100), got " + std::to_string(noise_percent));
  const double exact = (100.0 - noise_percent) * static_cast<double>(n) / 100.0;
  return std::min(n, static_cast<std::size_t>(std::floor(exact + 0.5)));
}

SelectionSet small_loss_select(std::span<const double> losses, std::span<const ExampleId> ids, double noise_percent,
                               Scope scope, int epoch) {
  if (losses.size() != ids.size()) throw std::invalid_argument("losses and ids are not aligned");
  const std::size_t k = keep_count(ids.size(), noise_percent);
  for (double l : losses)
    if (!std::isfinite(l)) throw std::invalid_argument("non-finite loss");

  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto by_loss_then_id = [&](std::size_t a, std::size_t b) {
    return losses[a] != losses[b] ? losses[a] < losses[b] : ids[a] < ids[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), by_loss_then_id);

  SelectionSet out{{}, scope, epoch};
  out.ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.ids.push_back(ids[order[i]]);
  std::sort(out.ids.begin(), out.ids.end());
  out.ids.erase(std::unique(out.ids.begin(), out.ids.end()), out.ids.end());
  return out;
}

SelectionSet intersect(const SelectionSet& a, const SelectionSet& b) {
  SelectionSet out{{}, a.scope, std::max(a.epoch, b.epoch)};
  std::set_intersection(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(), std::back_inserter(out.ids));
  return out;
}

SelectionSet set_union(const SelectionSet& a, const SelectionSet& b) {
  SelectionSet out{{}, a.scope, std::max(a.epoch, b.epoch)};
  std::set_union(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(), std::back_inserter(out.ids));
  return out;
}

SelectionSet consensus(std::span<const SelectionSet> sets, EnsembleSize m) {
  if (sets.empty()) throw std::invalid_argument("consensus needs at least one set");
  if (!m.is_unbounded() && sets.size() > m.value())
    throw std::invalid_argument("consensus got " + std::to_string(sets.size()) + " sets for M = " +
                                std::to_string(m.value()));
  SelectionSet out = sets.front();
  for (const auto& s : sets.subspan(1)) {
    if (s.scope != out.scope) throw std::invalid_argument("consensus over selection sets of mixed scope");
    out = intersect(out, s);
  }
  return out;
}

void TemporalPool::push(SelectionSet epoch_set) {
  if (!entries_.empty() && epoch_set.epoch <= entries_.back().epoch)
    throw std::invalid_argument("temporal pool epochs must strictly increase");
  const std::size_t cap = m_.history();
  if (cap == 0) return;
  entries_.push_back(std::move(epoch_set));
  while (entries_.size() > cap) entries_.pop_front();
}

SelectionSet temporal_consensus(const TemporalPool& pool, const SelectionSet& current, EnsembleSize m, int t) {
  for (const auto& e : pool.entries())
    if (e.epoch >= t) throw std::invalid_argument("temporal pool holds an entry from epoch >= t");
  if (t <= 1) return current;
  const std::size_t window = std::min<std::size_t>(m.history(), static_cast<std::size_t>(t - 1));
  const auto& entries = pool.entries();
  const std::size_t take = std::min(window, entries.size());
  SelectionSet out = current;
  for (std::size_t i = entries.size() - take; i < entries.size() && !out.empty(); ++i) {
    SelectionSet next{{}, current.scope, current.epoch};
    std::set_intersection(out.ids.begin(), out.ids.end(), entries[i].ids.begin(), entries[i].ids.end(),
                          std::back_inserter(next.ids));
    out = std::move(next);
  }
  return out;
}

void write_selection(std::ostream& os, const SelectionSet& set) {
  for (ExampleId id : set.ids) os << set.epoch << ',' << id << '\n';
}

}  // namespace lec
