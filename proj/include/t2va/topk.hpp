// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace t2va {

/// Indices of the `k` smallest keys, smallest first; equal keys keep their
/// original order. Depends only on the relative order of keys, so any
/// strictly increasing transform of the keys selects the same indices.
template <typename Key>
std::vector<std::size_t> top_k_smallest(std::span<const Key> keys, std::size_t k) {
  std::vector<std::size_t> idx(keys.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

template <typename Key>
std::vector<std::size_t> top_k_smallest(const std::vector<Key>& keys, std::size_t k) {
  return top_k_smallest(std::span<const Key>(keys), k);
}

/// Index of the smallest key among those accepted by `eligible`, earliest on
/// ties; nullopt when nothing is eligible.
template <typename Key, typename Pred>
std::optional<std::size_t> argmin_if(std::span<const Key> keys, Pred&& eligible) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!eligible(i)) continue;
    if (!best || keys[i] < keys[*best]) best = i;
  }
  return best;
}

}  // namespace t2va
