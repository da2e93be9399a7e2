// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "t2va/error.hpp"
#include "t2va/prompt.hpp"
#include "t2va/random.hpp"

namespace t2va {

inline constexpr std::size_t kEmbeddingDim = 256;

using EmbeddingVector = std::vector<double>;

/// Anything that maps text to a fixed-dimension vector: the built-in hashed
/// bag-of-words below, or a remote sentence embedder.
using Embedder = std::function<EmbeddingVector(std::string_view)>;

/// Lowercased alphanumeric runs.
inline std::vector<std::string> embedding_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

/// Signed feature hashing: bucket = h mod D, sign from bit 63 of FNV-1a.
inline EmbeddingVector embed_text(std::string_view text) {
  EmbeddingVector v(kEmbeddingDim, 0.0);
  for (const auto& w : embedding_words(text)) {
    const std::uint64_t h = fnv1a64(w);
    v[h % kEmbeddingDim] += (h >> 63) ? -1.0 : 1.0;
  }
  return v;
}

inline Embedder builtin_embedder() {
  return [](std::string_view text) { return embed_text(text); };
}

inline double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0 || nv == 0) return 0.0;
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::fmax(-1.0, std::fmin(1.0, c));
}

inline double semantic_similarity(std::string_view a, std::string_view b,
                                  const Embedder& embedder) {
  return cosine(embedder(a), embedder(b));
}

inline double semantic_similarity(const Prompt& x, const Prompt& adv,
                                  const Embedder& embedder) {
  return semantic_similarity(x.raw(), adv.raw(), embedder);
}

}  // namespace t2va
