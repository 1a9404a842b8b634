#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace lec::detail {

/// Splits `total` across groups in proportion to `sizes` (largest remainder,
/// ties to the lower group index). Each quota is floor or ceil of its exact
/// share, never above `caps[k]` (defaults to sizes).
inline std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t>& sizes,
                                          const std::vector<std::size_t>* caps = nullptr) {
  const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<std::size_t> quota(sizes.size(), 0);
  if (total == 0 || n == 0) return quota;
  if (total > n) throw std::invalid_argument("apportion: total exceeds population");
  const auto& cap = caps ? *caps : sizes;

  std::vector<std::size_t> remainder(sizes.size());
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const unsigned long long scaled = static_cast<unsigned long long>(total) * sizes[k];
    quota[k] = std::min<std::size_t>(scaled / n, cap[k]);
    remainder[k] = scaled % n;
    assigned += quota[k];
  }
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  // First pass hands out one extra per group by remainder; later passes only
  // run when caps bind.
  while (assigned < total) {
    bool progressed = false;
    for (std::size_t k : order) {
      if (assigned == total) break;
      if (quota[k] < cap[k]) {
        ++quota[k];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) throw std::invalid_argument("apportion: caps too small for total");
  }
  return quota;
}

}  // namespace lec::detail
