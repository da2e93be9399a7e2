// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "t2va/error.hpp"
#include "t2va/lexicon.hpp"
#include "t2va/prompt.hpp"
#include "t2va/protocol.hpp"
#include "t2va/textsim.hpp"
#include "t2va/topk.hpp"
#include "t2va/trace.hpp"

namespace t2va {

struct AttackSummary {
  std::string attack;
  std::string objective;
  std::string victim;
  double pre_score = 0;
  double post_score = 0;
  double difference = 0;
  double percent_drop = 0;
  double semantic_similarity = 1;
  double formal_similarity = 1;
  std::size_t word_modification_count = 0;
  std::size_t queries_used = 0;

  /// difference = pre - post; percent_drop = 100 * difference / pre (0 when
  /// pre is 0).
  static AttackSummary from_scores(double pre, double post) {
    AttackSummary s;
    s.pre_score = pre;
    s.post_score = post;
    s.difference = pre - post;
    s.percent_drop = pre > 0 ? 100.0 * s.difference / pre : 0.0;
    return s;
  }

  Json to_json() const {
    Json j;
    j["attack"] = attack;
    j["objective"] = objective;
    j["victim"] = victim;
    j["pre_score"] = pre_score;
    j["post_score"] = post_score;
    j["difference"] = difference;
    j["percent_drop"] = percent_drop;
    j["semantic_similarity"] = semantic_similarity;
    j["formal_similarity"] = formal_similarity;
    j["word_modification_count"] = word_modification_count;
    j["queries_used"] = queries_used;
    return j;
  }
};

inline AttackSummary summarize(const Trace& trace,
                               const Embedder& embedder = builtin_embedder()) {
  const auto& records = trace.records();
  auto baseline = std::find_if(records.begin(), records.end(),
                               [](const TraceRecord& r) { return r.phase == "baseline"; });
  if (baseline == records.end()) {
    throw Error(ErrorCode::kMissingBaseline, "trace has no baseline record");
  }
  const Json& res = trace.result();
  if (!res.is_object()) throw Error(ErrorCode::kMalformedTrace, "trace has no result record");
  try {
    AttackSummary s =
        AttackSummary::from_scores(baseline->score, res.at("post_score").get<double>());
    s.attack = res.value("attack", std::string{});
    s.objective = res.value("objective", std::string(to_string(baseline->objective)));
    s.victim = res.value("victim", std::string{});
    const Prompt original = tokenize(res.value("original", baseline->prompt));
    const Prompt adversarial = tokenize(res.at("adversarial").get<std::string>());
    s.semantic_similarity = semantic_similarity(original, adversarial, embedder);
    s.formal_similarity = formal_similarity(original, adversarial);
    s.word_modification_count = res.value("word_modification_count", std::size_t{0});
    s.queries_used = res.value("queries_used", std::size_t{0});
    return s;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformedTrace, e.what());
  }
}

// ---------------------------------------------------------------------------
// Report emission

enum class ReportFormat { kCsv, kMarkdown };

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string format_percent(double v) { return format_fixed(v, 1) + "%"; }

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "attack", "objective", "victim", "semantic_similarity", "formal_similarity",
      "pre", "post", "difference", "percent", "queries"};
  return cols;
}

inline std::vector<std::string> report_row(const AttackSummary& s) {
  return {s.attack,
          s.objective,
          s.victim,
          format_fixed(s.semantic_similarity, 2),
          format_fixed(s.formal_similarity, 2),
          format_fixed(s.pre_score, 1),
          format_fixed(s.post_score, 1),
          format_fixed(s.difference, 1),
          format_percent(s.percent_drop),
          std::to_string(s.queries_used)};
}

namespace detail {
inline std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace detail

inline std::string render_report(const std::vector<AttackSummary>& summaries,
                                 ReportFormat format) {
  if (summaries.empty()) throw Error(ErrorCode::kInvalidConfig, "no summaries to report");
  std::ostringstream out;
  const auto& cols = report_columns();
  if (format == ReportFormat::kCsv) {
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& s : summaries) {
      const auto row = report_row(s);
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << detail::csv_field(row[i]);
      out << '\n';
    }
  } else {
    out << '|';
    for (const auto& c : cols) out << ' ' << c << " |";
    out << "\n|";
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i < 3 ? "---|" : "---:|");
    out << '\n';
    for (const auto& s : summaries) {
      out << '|';
      for (const auto& v : report_row(s)) out << ' ' << v << " |";
      out << '\n';
    }
  }
  return out.str();
}

inline void export_report(const std::vector<AttackSummary>& summaries,
                          ReportFormat format, const std::string& path) {
  const std::string text = render_report(summaries, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path);
}

// ---------------------------------------------------------------------------
// Benchmark curation

/// Prompt x model score grid for one objective. Missing cells are nullopt.
struct CurationTable {
  std::string label;
  std::vector<std::string> prompts;
  std::vector<std::string> models;
  std::vector<std::vector<std::optional<double>>> scores;  // [prompt][model]

  /// TSV with header `prompt<TAB>model...`; empty or "NA" cells are missing.
  static CurationTable load_tsv(const std::string& path, std::string label = {}) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kFileNotFound, path);
    CurationTable t;
    t.label = label.empty() ? path : std::move(label);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (detail::trim(line).empty()) continue;
      auto cols = detail::split(line, '\t');
      if (header) {
        for (std::size_t i = 1; i < cols.size(); ++i)
          t.models.emplace_back(detail::trim(cols[i]));
        header = false;
        continue;
      }
      t.prompts.emplace_back(detail::trim(cols[0]));
      std::vector<std::optional<double>> row(t.models.size());
      for (std::size_t m = 0; m < t.models.size(); ++m) {
        if (m + 1 >= cols.size()) continue;
        auto cell = std::string(detail::trim(cols[m + 1]));
        if (cell.empty() || cell == "NA") continue;
        try {
          row[m] = std::stod(cell);
        } catch (const std::exception&) {
          throw Error(ErrorCode::kMalformedTrace, "bad score '" + cell + "' in " + path);
        }
      }
      t.scores.push_back(std::move(row));
    }
    return t;
  }
};

struct CurationResult {
  std::vector<std::string> prompts;
  Json provenance;
};

/// Per model: rank prompts by score descending (ties by prompt order), keep
/// the top k. The result is the intersection over every model of every
/// table, listed in the first table's prompt order.
inline CurationResult curate_prompts(const std::vector<CurationTable>& tables,
                                     std::size_t k) {
  if (tables.empty()) throw Error(ErrorCode::kInvalidConfig, "no curation tables");
  std::optional<std::set<std::string>> survivors;
  Json prov;
  prov["k"] = k;
  prov["tables"] = Json::array();
  std::vector<std::vector<std::map<std::string, std::size_t>>> ranks(tables.size());

  for (std::size_t ti = 0; ti < tables.size(); ++ti) {
    const auto& t = tables[ti];
    if (k > t.prompts.size()) {
      throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(k) + " exceeds " +
                                             std::to_string(t.prompts.size()) +
                                             " prompts in " + t.label);
    }
    for (std::size_t m = 0; m < t.models.size(); ++m) {
      std::vector<double> keys;  // negated so the smallest key is the best score
      for (std::size_t p = 0; p < t.prompts.size(); ++p) {
        const auto& cell = p < t.scores.size() && m < t.scores[p].size()
                               ? t.scores[p][m]
                               : std::optional<double>{};
        if (!cell) {
          throw Error(ErrorCode::kMissingCell,
                      t.label + ": no score for '" + t.prompts[p] + "' on " + t.models[m]);
        }
        keys.push_back(-*cell);
      }
      const auto order = top_k_smallest(keys, t.prompts.size());
      std::map<std::string, std::size_t> model_ranks;
      std::set<std::string> top;
      for (std::size_t r = 0; r < order.size(); ++r) {
        model_ranks.emplace(t.prompts[order[r]], r + 1);
        if (r < k) top.insert(t.prompts[order[r]]);
      }
      ranks[ti].push_back(std::move(model_ranks));
      if (!survivors) {
        survivors = std::move(top);
      } else {
        std::set<std::string> both;
        std::set_intersection(survivors->begin(), survivors->end(), top.begin(),
                              top.end(), std::inserter(both, both.begin()));
        survivors = std::move(both);
      }
    }
  }

  CurationResult out;
  std::set<std::string> emitted;
  for (const auto& p : tables.front().prompts) {
    if (survivors && survivors->count(p) && emitted.insert(p).second)
      out.prompts.push_back(p);
  }
  for (std::size_t ti = 0; ti < tables.size(); ++ti) {
    Json tj;
    tj["label"] = tables[ti].label;
    Json models = Json::object();
    for (std::size_t m = 0; m < tables[ti].models.size(); ++m) {
      Json per = Json::object();
      for (const auto& p : out.prompts) per[p] = ranks[ti][m].at(p);
      models[tables[ti].models[m]] = per;
    }
    tj["ranks"] = models;
    prov["tables"].push_back(tj);
  }
  prov["selected"] = out.prompts;
  out.provenance = std::move(prov);
  return out;
}

// ---------------------------------------------------------------------------
// POS effectiveness

struct PosReport {
  std::map<PosTag, double> effective;
  std::map<PosTag, double> vocabulary;
  std::map<PosTag, double> delta;
  std::size_t pooled_words = 0;

  Json to_json() const {
    Json j;
    j["pooled_words"] = pooled_words;
    for (const char* key : {"effective", "vocabulary", "delta"}) {
      const auto& m = std::string(key) == "effective"    ? effective
                      : std::string(key) == "vocabulary" ? vocabulary
                                                         : delta;
      Json part = Json::object();
      for (auto tag : kAllPosTags) part[std::string(to_string(tag))] = m.at(tag);
      j[key] = part;
    }
    return j;
  }
};

/// The word a single-insertion candidate added relative to `original`: the
/// candidate token at the first index where the two sequences differ.
inline std::string inserted_word(const Prompt& original, const Prompt& candidate) {
  std::size_t i = 0;
  while (i < original.size() && candidate[i] == original[i]) ++i;
  return candidate[i];
}

inline std::map<PosTag, double> pos_distribution(const std::vector<std::string>& words,
                                                 const PosLexicon& pos) {
  std::map<PosTag, double> dist;
  for (auto tag : kAllPosTags) dist[tag] = 0;
  if (words.empty()) return dist;
  std::map<PosTag, std::size_t> counts;
  for (const auto& w : words) ++counts[pos.primary(w)];
  for (auto tag : kAllPosTags)
    dist[tag] = static_cast<double>(counts[tag]) / static_cast<double>(words.size());
  return dist;
}

/// Pools the K lowest-scoring level-1 inserted words of every trace and
/// compares their primary-tag distribution with the vocabulary's.
inline PosReport pos_distribution_diff(const std::vector<Trace>& traces, std::size_t k,
                                       const PosLexicon& pos, const Vocabulary& vocab) {
  std::vector<std::string> pooled;
  for (const auto& trace : traces) {
    std::vector<const TraceRecord*> level1;
    std::optional<Prompt> original;
    for (const auto& r : trace.records()) {
      if (r.phase == "baseline" && !original) original = tokenize(r.prompt);
      if (r.phase == "insertion_level_1") level1.push_back(&r);
    }
    if (trace.result().is_object() && trace.result().contains("original")) {
      original = tokenize(trace.result()["original"].get<std::string>());
    }
    if (!original) throw Error(ErrorCode::kMissingBaseline, "trace lacks the original prompt");
    if (level1.size() < k) {
      throw Error(ErrorCode::kInsufficientCandidates,
                  "trace has " + std::to_string(level1.size()) +
                      " level-1 candidates, K=" + std::to_string(k));
    }
    std::vector<double> scores;
    for (const auto* r : level1) scores.push_back(r->score);
    for (auto i : top_k_smallest(scores, k))
      pooled.push_back(inserted_word(*original, tokenize(level1[i]->prompt)));
  }
  PosReport rep;
  rep.pooled_words = pooled.size();
  rep.effective = pos_distribution(pooled, pos);
  rep.vocabulary = pos_distribution(vocab.words, pos);
  for (auto tag : kAllPosTags) rep.delta[tag] = rep.effective[tag] - rep.vocabulary[tag];
  return rep;
}

}  // namespace t2va
