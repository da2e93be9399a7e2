// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "t2va/error.hpp"
#include "t2va/random.hpp"

namespace t2va {

/// A whitespace-tokenized prompt. Tokens keep their case and any attached
/// punctuation; `raw()` is always the tokens joined by single spaces.
class Prompt {
 public:
  Prompt() = default;

  /// Builds a prompt from tokens. Throws EmptyPrompt for an empty list and
  /// InvalidEdit for empty tokens or tokens containing whitespace.
  static Prompt from_tokens(std::vector<std::string> tokens) {
    if (tokens.empty()) throw Error(ErrorCode::kEmptyPrompt, "no tokens");
    for (const auto& t : tokens) {
      if (t.empty() ||
          std::any_of(t.begin(), t.end(),
                      [](unsigned char c) { return std::isspace(c) != 0; })) {
        throw Error(ErrorCode::kInvalidEdit,
                    "token must be non-empty and whitespace-free: '" + t + "'");
      }
    }
    Prompt p;
    p.tokens_ = std::move(tokens);
    p.rebuild_raw();
    return p;
  }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& raw() const { return raw_; }
  std::size_t size() const { return tokens_.size(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

  friend bool operator==(const Prompt& a, const Prompt& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  void rebuild_raw() {
    raw_.clear();
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (i) raw_.push_back(' ');
      raw_ += tokens_[i];
    }
  }

  std::vector<std::string> tokens_;
  std::string raw_;
};

inline Prompt tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyPrompt, "prompt contains no words");
  }
  return Prompt::from_tokens(std::move(tokens));
}

inline std::string detokenize(const Prompt& p) { return p.raw(); }

// ---------------------------------------------------------------------------
// Word-level edits

enum class EditKind { kSubstitution, kInsertion, kDeletion, kReordering };

inline std::string_view to_string(EditKind k) {
  switch (k) {
    case EditKind::kSubstitution: return "substitution";
    case EditKind::kInsertion: return "insertion";
    case EditKind::kDeletion: return "deletion";
    case EditKind::kReordering: return "reordering";
  }
  return "unknown";
}

struct EditOp {
  EditKind kind = EditKind::kSubstitution;
  std::size_t index = 0;
  std::size_t second_index = 0;  // Reordering only
  std::string word;              // Substitution / Insertion only

  static EditOp substitute(std::size_t i, std::string w) {
    return {EditKind::kSubstitution, i, 0, std::move(w)};
  }
  static EditOp insert(std::size_t i, std::string w) {
    return {EditKind::kInsertion, i, 0, std::move(w)};
  }
  static EditOp remove(std::size_t i) { return {EditKind::kDeletion, i, 0, {}}; }
  static EditOp reorder(std::size_t i, std::size_t j) {
    return {EditKind::kReordering, i, j, {}};
  }

  friend bool operator==(const EditOp&, const EditOp&) = default;
};

inline Prompt apply_edit(const Prompt& p, const EditOp& op) {
  const std::size_t n = p.size();
  auto tokens = p.tokens();
  auto out_of_bounds = [&](std::size_t i) {
    return Error(ErrorCode::kIndexOutOfBounds,
                 "index " + std::to_string(i) + " outside prompt of " +
                     std::to_string(n) + " tokens");
  };
  switch (op.kind) {
    case EditKind::kSubstitution:
      if (op.index >= n) throw out_of_bounds(op.index);
      tokens[op.index] = op.word;
      break;
    case EditKind::kInsertion:
      if (op.index > n) throw out_of_bounds(op.index);
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(op.index),
                    op.word);
      break;
    case EditKind::kDeletion:
      if (op.index >= n) throw out_of_bounds(op.index);
      if (n == 1) {
        throw Error(ErrorCode::kDeletionOfOnlyToken,
                    "cannot delete the only token");
      }
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(op.index));
      break;
    case EditKind::kReordering:
      if (op.index >= n) throw out_of_bounds(op.index);
      if (op.second_index >= n) throw out_of_bounds(op.second_index);
      if (op.index == op.second_index) {
        throw Error(ErrorCode::kInvalidEdit, "reordering needs two positions");
      }
      std::swap(tokens[op.index], tokens[op.second_index]);
      break;
  }
  return Prompt::from_tokens(std::move(tokens));
}

// ---------------------------------------------------------------------------
// Character-level perturbations

enum class CharPerturbKind {
  kCharInsert,
  kCharDelete,
  kCharReorder,
  kCharSubstitute,
  kCharDuplicate,
  kSymbolReplace,
  kCaseFlip,
};

inline constexpr std::array<CharPerturbKind, 7> kAllCharPerturbKinds = {
    CharPerturbKind::kCharInsert,    CharPerturbKind::kCharDelete,
    CharPerturbKind::kCharReorder,   CharPerturbKind::kCharSubstitute,
    CharPerturbKind::kCharDuplicate, CharPerturbKind::kSymbolReplace,
    CharPerturbKind::kCaseFlip,
};

inline std::string_view to_string(CharPerturbKind k) {
  switch (k) {
    case CharPerturbKind::kCharInsert: return "char_insert";
    case CharPerturbKind::kCharDelete: return "char_delete";
    case CharPerturbKind::kCharReorder: return "char_reorder";
    case CharPerturbKind::kCharSubstitute: return "char_substitute";
    case CharPerturbKind::kCharDuplicate: return "char_duplicate";
    case CharPerturbKind::kSymbolReplace: return "symbol_replace";
    case CharPerturbKind::kCaseFlip: return "case_flip";
  }
  return "unknown";
}

/// Leetspeak table used by SymbolReplace. Matching is case-insensitive.
struct SymbolMap {
  std::vector<std::pair<char, char>> entries = {
      {'a', '@'}, {'s', '$'}, {'i', '1'}, {'o', '0'}, {'e', '3'}, {'l', '!'}};

  std::optional<char> lookup(char c) const {
    const char lower =
        static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const auto& [from, to] : entries) {
      if (from == lower) return to;
    }
    return std::nullopt;
  }
};

inline constexpr std::string_view kPerturbAlphabet =
    "abcdefghijklmnopqrstuvwxyz";

/// A fully resolved character edit: which kind, where, and (for kinds that
/// need one) which replacement character.
struct CharPerturbation {
  CharPerturbKind kind = CharPerturbKind::kCharInsert;
  std::size_t position = 0;
  char character = 0;

  friend bool operator==(const CharPerturbation&,
                         const CharPerturbation&) = default;
};

/// Positions at which `kind` produces a visible change in `word`.
inline std::vector<std::size_t> eligible_positions(std::string_view word,
                                                   CharPerturbKind kind,
                                                   const SymbolMap& symbols = {}) {
  std::vector<std::size_t> out;
  const std::size_t n = word.size();
  switch (kind) {
    case CharPerturbKind::kCharInsert:
      for (std::size_t i = 0; i <= n; ++i) out.push_back(i);
      break;
    case CharPerturbKind::kCharDelete:
      if (n >= 2)
        for (std::size_t i = 0; i < n; ++i) out.push_back(i);
      break;
    case CharPerturbKind::kCharReorder:
      for (std::size_t i = 0; i + 1 < n; ++i)
        if (word[i] != word[i + 1]) out.push_back(i);
      break;
    case CharPerturbKind::kCharSubstitute:
    case CharPerturbKind::kCharDuplicate:
      for (std::size_t i = 0; i < n; ++i) out.push_back(i);
      break;
    case CharPerturbKind::kSymbolReplace:
      for (std::size_t i = 0; i < n; ++i)
        if (symbols.lookup(word[i])) out.push_back(i);
      break;
    case CharPerturbKind::kCaseFlip:
      for (std::size_t i = 0; i < n; ++i)
        if (std::isalpha(static_cast<unsigned char>(word[i]))) out.push_back(i);
      break;
  }
  return out;
}

inline bool is_applicable(std::string_view word, CharPerturbKind kind,
                          const SymbolMap& symbols = {}) {
  return !word.empty() && !eligible_positions(word, kind, symbols).empty();
}

inline std::vector<CharPerturbKind> applicable_kinds(
    std::string_view word, const SymbolMap& symbols = {}) {
  std::vector<CharPerturbKind> out;
  for (auto k : kAllCharPerturbKinds)
    if (is_applicable(word, k, symbols)) out.push_back(k);
  return out;
}

/// Applies a resolved perturbation. Throws InapplicableKind when the
/// position is not eligible or the result would equal the input.
inline std::string apply_char_perturbation(std::string_view word,
                                           const CharPerturbation& c,
                                           const SymbolMap& symbols = {}) {
  const auto positions = eligible_positions(word, c.kind, symbols);
  if (word.empty() ||
      std::find(positions.begin(), positions.end(), c.position) ==
          positions.end()) {
    throw Error(ErrorCode::kInapplicableKind,
                std::string(to_string(c.kind)) + " not applicable to '" +
                    std::string(word) + "' at " + std::to_string(c.position));
  }
  std::string out(word);
  switch (c.kind) {
    case CharPerturbKind::kCharInsert:
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(c.position),
                 c.character);
      break;
    case CharPerturbKind::kCharDelete:
      out.erase(c.position, 1);
      break;
    case CharPerturbKind::kCharReorder:
      std::swap(out[c.position], out[c.position + 1]);
      break;
    case CharPerturbKind::kCharSubstitute:
      out[c.position] = c.character;
      break;
    case CharPerturbKind::kCharDuplicate:
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(c.position),
                 out[c.position]);
      break;
    case CharPerturbKind::kSymbolReplace:
      out[c.position] = *symbols.lookup(out[c.position]);
      break;
    case CharPerturbKind::kCaseFlip: {
      const auto ch = static_cast<unsigned char>(out[c.position]);
      out[c.position] = static_cast<char>(std::isupper(ch) ? std::tolower(ch)
                                                           : std::toupper(ch));
      break;
    }
  }
  if (out == word) {
    throw Error(ErrorCode::kInapplicableKind,
                "perturbation leaves '" + std::string(word) + "' unchanged");
  }
  return out;
}

/// Draws a perturbation of `kind` for `word` from `rng`. Draw order: first
/// the position (uniform over eligible positions), then the character for
/// CharInsert (uniform over a-z) or CharSubstitute (uniform over a-z minus
/// the current character, case-insensitively).
inline CharPerturbation plan_char_perturbation(std::string_view word,
                                               CharPerturbKind kind,
                                               SplitMix64& rng,
                                               const SymbolMap& symbols = {}) {
  const auto positions = eligible_positions(word, kind, symbols);
  if (word.empty() || positions.empty()) {
    throw Error(ErrorCode::kInapplicableKind,
                std::string(to_string(kind)) + " not applicable to '" +
                    std::string(word) + "'");
  }
  CharPerturbation c{kind, positions[rng.uniform(positions.size())], 0};
  if (kind == CharPerturbKind::kCharInsert) {
    c.character = kPerturbAlphabet[rng.uniform(kPerturbAlphabet.size())];
  } else if (kind == CharPerturbKind::kCharSubstitute) {
    const char current = static_cast<char>(
        std::tolower(static_cast<unsigned char>(word[c.position])));
    std::string choices;
    for (char ch : kPerturbAlphabet)
      if (ch != current) choices.push_back(ch);
    c.character = choices[rng.uniform(choices.size())];
  }
  return c;
}

inline std::string perturb_chars(std::string_view word, CharPerturbKind kind,
                                 SplitMix64& rng,
                                 const SymbolMap& symbols = {}) {
  return apply_char_perturbation(
      word, plan_char_perturbation(word, kind, rng, symbols), symbols);
}

// ---------------------------------------------------------------------------
// Formal similarity

/// Unit-cost edit distance over bytes, two-row dynamic programme.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// 1 - levenshtein / max length, on the normalized raw text.
inline double formal_similarity(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) /
                   static_cast<double>(longest);
}

inline double formal_similarity(const Prompt& x, const Prompt& adv) {
  return formal_similarity(x.raw(), adv.raw());
}

}  // namespace t2va
