// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "t2va/error.hpp"
#include "t2va/random.hpp"
#include "t2va/textsim.hpp"

namespace t2va {

namespace detail {

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

/// Non-empty trimmed lines of a text file.
inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (!t.empty()) lines.emplace_back(t);
  }
  return lines;
}

inline bool all_letters(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](unsigned char c) {
    return std::isalpha(c) != 0;
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Vocabulary

struct Vocabulary {
  std::vector<std::string> words;
  std::string source_name;
  std::size_t original_size = 0;
  std::size_t filtered_size = 0;

  /// Lowercases and de-duplicates, preserving first occurrence order. No
  /// spell filter; used for in-memory fixtures.
  static Vocabulary from_words(const std::vector<std::string>& input,
                               std::string source = "inline") {
    Vocabulary v;
    v.source_name = std::move(source);
    v.original_size = input.size();
    std::unordered_set<std::string> seen;
    for (const auto& w : input) {
      auto lw = detail::lowercase(detail::trim(w));
      if (lw.empty()) continue;
      if (seen.insert(lw).second) v.words.push_back(std::move(lw));
    }
    v.filtered_size = v.words.size();
    if (v.words.empty()) throw Error(ErrorCode::kEmptyVocabulary, v.source_name);
    return v;
  }
};

/// Spell-check filter: keeps alphabetic entries present in `dictionary`
/// (case-insensitive), first occurrence order.
inline Vocabulary filter_vocabulary(const std::vector<std::string>& lines,
                                    const std::unordered_set<std::string>& dictionary,
                                    std::string source_name) {
  Vocabulary v;
  v.source_name = std::move(source_name);
  v.original_size = lines.size();
  std::unordered_set<std::string> seen;
  for (const auto& line : lines) {
    if (!detail::all_letters(line)) continue;
    auto lw = detail::lowercase(line);
    if (!dictionary.count(lw)) continue;
    if (seen.insert(lw).second) v.words.push_back(std::move(lw));
  }
  v.filtered_size = v.words.size();
  if (v.words.empty()) {
    throw Error(ErrorCode::kEmptyVocabulary,
                "nothing in '" + v.source_name + "' survived the spell filter");
  }
  return v;
}

inline Vocabulary load_vocabulary(const std::string& path,
                                  const std::string& wordlist_path) {
  const auto lines = detail::read_lines(path);
  std::unordered_set<std::string> dict;
  for (const auto& w : detail::read_lines(wordlist_path))
    dict.insert(detail::lowercase(w));
  return filter_vocabulary(lines, dict, path);
}

/// `q` distinct words by a seeded partial Fisher-Yates shuffle.
inline std::vector<std::string> sample_words(const Vocabulary& v, std::size_t q,
                                             SplitMix64& rng) {
  const std::size_t n = v.words.size();
  if (q > n) {
    throw Error(ErrorCode::kSampleTooLarge, "requested " + std::to_string(q) +
                                                " of " + std::to_string(n));
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::string> out;
  out.reserve(q);
  for (std::size_t i = 0; i < q; ++i) {
    const std::size_t j = i + rng.uniform(n - i);
    std::swap(idx[i], idx[j]);
    out.push_back(v.words[idx[i]]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synonyms, stopwords, POS

struct SynonymCandidate {
  std::string word;
  std::string relation;
  /// Precomputed word similarity to the head (optional fourth TSV column).
  /// When present it replaces the embedder in the similarity filter.
  std::optional<double> similarity;

  friend bool operator==(const SynonymCandidate&,
                         const SynonymCandidate&) = default;
};

struct SynonymSet {
  std::string head;
  std::vector<SynonymCandidate> candidates;
};

class SynonymTable {
 public:
  /// Adds a candidate; self-references and repeats are ignored.
  void add(std::string_view head, SynonymCandidate c) {
    auto key = detail::lowercase(head);
    if (detail::lowercase(c.word) == key || c.word.empty()) return;
    auto& set = sets_[key];
    set.head = key;
    for (const auto& existing : set.candidates)
      if (existing.word == c.word) return;
    set.candidates.push_back(std::move(c));
  }

  SynonymSet lookup(std::string_view head) const {
    auto key = detail::lowercase(head);
    auto it = sets_.find(key);
    if (it == sets_.end()) return SynonymSet{key, {}};
    return it->second;
  }

  std::size_t size() const { return sets_.size(); }

 private:
  std::unordered_map<std::string, SynonymSet> sets_;
};

/// TSV: head<TAB>synonym<TAB>relation[<TAB>similarity]
inline SynonymTable load_synonyms(const std::string& path) {
  SynonymTable table;
  for (const auto& line : detail::read_lines(path)) {
    if (line.front() == '#') continue;
    auto cols = detail::split(line, '\t');
    if (cols.size() < 2) continue;
    SynonymCandidate c{std::string(detail::trim(cols[1])),
                       cols.size() > 2 ? std::string(detail::trim(cols[2])) : "",
                       std::nullopt};
    if (cols.size() > 3 && !detail::trim(cols[3]).empty()) {
      c.similarity = std::stod(std::string(detail::trim(cols[3])));
    }
    table.add(detail::trim(cols[0]), std::move(c));
  }
  return table;
}

using StopwordSet = std::unordered_set<std::string>;

inline StopwordSet load_stopwords(const std::string& path) {
  StopwordSet s;
  for (const auto& w : detail::read_lines(path)) s.insert(detail::lowercase(w));
  return s;
}

enum class PosTag { kNoun, kVerb, kAdj, kAdv, kOther };

inline constexpr std::array<PosTag, 5> kAllPosTags = {
    PosTag::kNoun, PosTag::kVerb, PosTag::kAdj, PosTag::kAdv, PosTag::kOther};

inline std::string_view to_string(PosTag t) {
  switch (t) {
    case PosTag::kNoun: return "NOUN";
    case PosTag::kVerb: return "VERB";
    case PosTag::kAdj: return "ADJ";
    case PosTag::kAdv: return "ADV";
    case PosTag::kOther: return "OTHER";
  }
  return "OTHER";
}

inline std::optional<PosTag> parse_pos_tag(std::string_view s) {
  auto t = detail::trim(s);
  for (auto tag : kAllPosTags)
    if (to_string(tag) == t) return tag;
  return std::nullopt;
}

/// Suffix rules for words missing from the lexicon.
inline PosTag heuristic_pos(std::string_view word) {
  auto w = detail::lowercase(word);
  auto ends_with = [&](std::string_view suf) {
    return w.size() >= suf.size() &&
           std::string_view(w).substr(w.size() - suf.size()) == suf;
  };
  if (ends_with("ly")) return PosTag::kAdv;
  if (ends_with("ing") || ends_with("ed")) return PosTag::kVerb;
  if (ends_with("ous") || ends_with("ful") || ends_with("ive")) return PosTag::kAdj;
  return PosTag::kNoun;
}

class PosLexicon {
 public:
  /// Tags are kept in the order given; the first is the primary tag.
  void add(std::string_view word, std::vector<PosTag> tags) {
    if (tags.empty()) return;
    auto& dst = tags_[detail::lowercase(word)];
    for (auto t : tags)
      if (std::find(dst.begin(), dst.end(), t) == dst.end()) dst.push_back(t);
  }

  bool contains(std::string_view word) const {
    return tags_.count(detail::lowercase(word)) > 0;
  }

  std::vector<PosTag> tags(std::string_view word) const {
    auto it = tags_.find(detail::lowercase(word));
    if (it != tags_.end()) return it->second;
    return {heuristic_pos(word)};
  }

  PosTag primary(std::string_view word) const { return tags(word).front(); }

  bool shares_tag(std::string_view a, std::string_view b) const {
    const auto ta = tags(a);
    const auto tb = tags(b);
    for (auto t : ta)
      if (std::find(tb.begin(), tb.end(), t) != tb.end()) return true;
    return false;
  }

 private:
  std::unordered_map<std::string, std::vector<PosTag>> tags_;
};

/// TSV: word<TAB>TAG[,TAG...]
inline PosLexicon load_pos_lexicon(const std::string& path) {
  PosLexicon lex;
  for (const auto& line : detail::read_lines(path)) {
    if (line.front() == '#') continue;
    auto cols = detail::split(line, '\t');
    if (cols.size() < 2) continue;
    std::vector<PosTag> tags;
    for (const auto& t : detail::split(cols[1], ','))
      if (auto tag = parse_pos_tag(t)) tags.push_back(*tag);
    lex.add(detail::trim(cols[0]), std::move(tags));
  }
  return lex;
}

/// Everything the substitution attack draws candidates from.
struct Lexicon {
  SynonymTable synonyms;
  StopwordSet stopwords;
  PosLexicon pos;
};

/// Three-step candidate filter, applied in order: stopwords out, word
/// similarity to the head strictly above `theta`, at least one shared POS
/// tag. Input order is preserved.
inline std::vector<SynonymCandidate> filter_candidates(
    std::string_view head, const SynonymSet& syns, double theta,
    const Embedder& embedder, const StopwordSet& stopwords,
    const PosLexicon& pos) {
  std::vector<SynonymCandidate> out;
  for (const auto& c : syns.candidates) {
    if (stopwords.count(detail::lowercase(c.word))) continue;
    const double sim = c.similarity ? *c.similarity
                                    : semantic_similarity(c.word, head, embedder);
    if (!(sim > theta)) continue;
    if (!pos.shares_tag(head, c.word)) continue;
    out.push_back(c);
  }
  return out;
}

}  // namespace t2va
