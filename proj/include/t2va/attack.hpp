// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

// Query-budgeted prompt attacks against a black-box scorer:
//   - greedy synonym substitution walked in word-importance order,
//   - multi-level prefix insertion with TOP-K retention per level,
//   - insertion followed by character perturbations of the inserted words,
//   - single random edits used as a baseline probe.
// All randomness comes from one SplitMix64 stream seeded by the config.

#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "t2va/config.hpp"
#include "t2va/error.hpp"
#include "t2va/lexicon.hpp"
#include "t2va/prompt.hpp"
#include "t2va/random.hpp"
#include "t2va/scorer.hpp"
#include "t2va/textsim.hpp"
#include "t2va/topk.hpp"
#include "t2va/trace.hpp"

namespace t2va {

struct ImportanceEntry {
  std::size_t index = 0;
  std::string word;
  double importance = 0;
};

struct ImportanceRanking {
  /// Descending importance, ties by ascending index.
  std::vector<ImportanceEntry> entries;
  double baseline_score = 0;
};

enum class AttackOutcome { kSuccess, kCriterionNotMet, kNoCandidates };

inline std::string_view to_string(AttackOutcome o) {
  switch (o) {
    case AttackOutcome::kSuccess: return "success";
    case AttackOutcome::kCriterionNotMet: return "criterion_not_met";
    case AttackOutcome::kNoCandidates: return "no_candidates";
  }
  return "criterion_not_met";
}

struct CharEditRecord {
  std::size_t token_index = 0;  // in the adversarial prompt
  CharPerturbation perturbation;
  std::string before;
  std::string after;
};

struct AttackResult {
  std::string attack;
  Objective objective = Objective::kSemantic;
  Prompt original;
  Prompt adversarial;
  double pre_score = 0;
  double post_score = 0;
  /// Word-level edits in application order; replaying them on `original`
  /// yields the word sequence of `adversarial` before char edits.
  std::vector<EditOp> word_edits;
  std::vector<CharEditRecord> char_edits;
  /// Unique victim queries charged to the attack. A standalone pre-score
  /// query is not charged; the importance pass (baseline included) is.
  std::size_t queries_used = 0;
  /// Unique victim queries issued during the run, charged or not.
  std::size_t wire_queries = 0;
  bool success = false;
  AttackOutcome outcome = AttackOutcome::kCriterionNotMet;
  double semantic_similarity = 1;
  double formal_similarity = 1;

  std::size_t word_modification_count() const { return word_edits.size(); }

  Json to_json() const {
    Json j;
    j["attack"] = attack;
    j["objective"] = std::string(to_string(objective));
    j["original"] = original.raw();
    j["adversarial"] = adversarial.raw();
    j["pre_score"] = pre_score;
    j["post_score"] = post_score;
    j["success"] = success;
    j["outcome"] = std::string(to_string(outcome));
    j["queries_used"] = queries_used;
    j["wire_queries"] = wire_queries;
    j["word_modification_count"] = word_modification_count();
    j["semantic_similarity"] = semantic_similarity;
    j["formal_similarity"] = formal_similarity;
    Json edits = Json::array();
    for (const auto& e : word_edits) {
      Json r;
      r["kind"] = std::string(to_string(e.kind));
      r["index"] = e.index;
      if (e.kind == EditKind::kReordering) r["second_index"] = e.second_index;
      if (e.kind == EditKind::kSubstitution || e.kind == EditKind::kInsertion)
        r["word"] = e.word;
      edits.push_back(r);
    }
    j["edits"] = edits;
    Json chars = Json::array();
    for (const auto& c : char_edits) {
      Json r;
      r["kind"] = std::string(to_string(c.perturbation.kind));
      r["token_index"] = c.token_index;
      r["position"] = c.perturbation.position;
      r["before"] = c.before;
      r["after"] = c.after;
      chars.push_back(r);
    }
    j["char_edits"] = chars;
    return j;
  }
};

namespace detail {

/// Scoring front-end shared by the engines: attaches the original prompt,
/// objective and victim seed, appends every outcome to the trace, and
/// tracks ledger deltas.
class AttackSession {
 public:
  AttackSession(const Prompt& original, const AttackConfig& cfg,
                ScorerClient& client, Trace* trace)
      : original_(original),
        cfg_(cfg),
        client_(client),
        trace_(trace),
        start_(client.ledger().unique_queries) {}

  double score(const Prompt& p, const std::string& phase) {
    return score_batch({p}, phase).front();
  }

  std::vector<double> score_batch(const std::vector<Prompt>& prompts,
                                  const std::string& phase) {
    std::vector<ScoreRequest> reqs;
    reqs.reserve(prompts.size());
    for (const auto& p : prompts)
      reqs.push_back({p.raw(), original_.raw(), cfg_.objective, cfg_.victim_seed});
    const auto outcomes = client_.batch_score(reqs, phase);
    std::vector<double> scores;
    scores.reserve(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (trace_) {
        trace_->add(phase, prompts[i].raw(), cfg_.objective, outcomes[i].score,
                    outcomes[i].cached);
      }
      scores.push_back(outcomes[i].score);
    }
    return scores;
  }

  /// Pre-attack score of the original prompt; not charged to the budget.
  double uncharged_baseline() {
    const auto before = client_.ledger().unique_queries;
    const double s = score(original_, "baseline");
    uncharged_ += client_.ledger().unique_queries - before;
    return s;
  }

  std::size_t wire_queries() const {
    return client_.ledger().unique_queries - start_;
  }
  std::size_t charged_queries() const { return wire_queries() - uncharged_; }

 private:
  const Prompt& original_;
  const AttackConfig& cfg_;
  ScorerClient& client_;
  Trace* trace_;
  std::size_t start_;
  std::size_t uncharged_ = 0;
};

inline ImportanceRanking rank_importance(const Prompt& x, AttackSession& session) {
  if (x.size() < 2) {
    throw Error(ErrorCode::kPromptTooShort,
                "importance needs at least two words, got " + std::to_string(x.size()));
  }
  ImportanceRanking ranking;
  ranking.baseline_score = session.score(x, "baseline");
  std::vector<Prompt> deleted;
  deleted.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    deleted.push_back(apply_edit(x, EditOp::remove(i)));
  const auto scores = session.score_batch(deleted, "importance");
  for (std::size_t i = 0; i < x.size(); ++i)
    ranking.entries.push_back({i, x[i], ranking.baseline_score - scores[i]});
  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const ImportanceEntry& a, const ImportanceEntry& b) {
                     return a.importance > b.importance;
                   });
  return ranking;
}

struct StealthCheck {
  const Prompt& original;
  const AttackConfig& cfg;
  const Embedder& embedder;

  double semantic(const Prompt& p) const {
    return semantic_similarity(original, p, embedder);
  }
  double formal(const Prompt& p) const { return formal_similarity(original, p); }
  bool ok(const Prompt& p) const {
    return formal(p) > cfg.eps_formal && semantic(p) > cfg.eps_semantic;
  }
  void require(const Prompt& p) const {
    if (!ok(p)) {
      throw Error(ErrorCode::kStealthViolation,
                  "'" + p.raw() + "' violates the similarity floors (semantic " +
                      std::to_string(semantic(p)) + ", formal " +
                      std::to_string(formal(p)) + ")");
    }
  }
};

inline void finish_result(AttackResult& r, const AttackConfig& cfg,
                          const StealthCheck& stealth,
                          const AttackSession& session) {
  r.semantic_similarity = stealth.semantic(r.adversarial);
  r.formal_similarity = stealth.formal(r.adversarial);
  r.success = r.post_score <= cfg.tau_value() * r.pre_score;
  if (r.outcome != AttackOutcome::kNoCandidates) {
    r.outcome = r.success ? AttackOutcome::kSuccess
                          : AttackOutcome::kCriterionNotMet;
  }
  r.queries_used = session.charged_queries();
  r.wire_queries = session.wire_queries();
}

/// One scored insertion candidate. `prefix_len` words starting at the
/// insertion position were added by the attack.
struct InsertionCandidate {
  Prompt prompt;
  std::vector<EditOp> edits;
  double score = 0;
};

struct InsertionOutcome {
  AttackResult result;
  std::size_t insert_at = 0;
  std::vector<std::string> scored_prompts;
};

inline InsertionOutcome run_insertion(const Prompt& x, const AttackConfig& cfg,
                                      const Vocabulary& vocab, ScorerClient& client,
                                      const Embedder& embedder, Trace* trace,
                                      SplitMix64& rng, std::string attack_name) {
  cfg.validate();
  const Schedule& schedule = cfg.schedule;
  if (cfg.max_word_edits && schedule.levels() > *cfg.max_word_edits) {
    throw Error(ErrorCode::kInvalidConfig,
                "schedule inserts " + std::to_string(schedule.levels()) +
                    " words but max_word_edits is " +
                    std::to_string(*cfg.max_word_edits));
  }
  for (std::size_t i = 0; i < schedule.q.size(); ++i) {
    if (schedule.q[i] > vocab.words.size()) {
      throw Error(ErrorCode::kScheduleInfeasible,
                  "q" + std::to_string(i + 1) + "=" + std::to_string(schedule.q[i]) +
                      " exceeds vocabulary of " + std::to_string(vocab.words.size()));
    }
  }

  AttackSession session(x, cfg, client, trace);
  StealthCheck stealth{x, cfg, embedder};
  InsertionOutcome out;
  AttackResult& r = out.result;
  r.attack = std::move(attack_name);
  r.objective = cfg.objective;
  r.original = x;

  std::size_t at = 0;
  switch (cfg.position) {
    case InsertPosition::kFirst: at = 0; break;
    case InsertPosition::kMiddle: at = x.size() / 2; break;
    case InsertPosition::kLast: at = x.size(); break;
    case InsertPosition::kRandom: at = rng.uniform(x.size() + 1); break;
    case InsertPosition::kImportant: {
      auto ranking = rank_importance(x, session);
      r.pre_score = ranking.baseline_score;
      at = ranking.entries.front().index;
      break;
    }
  }
  if (cfg.position != InsertPosition::kImportant) {
    r.pre_score = session.uncharged_baseline();
  }
  out.insert_at = at;

  std::vector<InsertionCandidate> all;
  std::vector<std::size_t> retained;  // indices into `all`
  for (std::size_t level = 0; level < schedule.levels(); ++level) {
    const std::string phase = "insertion_level_" + std::to_string(level + 1);
    std::vector<InsertionCandidate> pool;
    auto extend = [&](const Prompt& base, const std::vector<EditOp>& edits) {
      for (auto& w : sample_words(vocab, schedule.q[level], rng)) {
        InsertionCandidate c;
        c.edits = edits;
        c.edits.push_back(EditOp::insert(at, std::move(w)));
        c.prompt = apply_edit(base, c.edits.back());
        pool.push_back(std::move(c));
      }
    };
    if (level == 0) {
      extend(x, {});
    } else {
      for (auto idx : retained) {
        const InsertionCandidate parent = all[idx];
        extend(parent.prompt, parent.edits);
      }
    }
    std::vector<Prompt> prompts;
    prompts.reserve(pool.size());
    for (const auto& c : pool) prompts.push_back(c.prompt);
    const auto scores = session.score_batch(prompts, phase);
    const std::size_t offset = all.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      pool[i].score = scores[i];
      all.push_back(std::move(pool[i]));
    }
    if (level + 1 < schedule.levels()) {
      retained.clear();
      for (auto i : top_k_smallest(scores, schedule.k[level]))
        retained.push_back(offset + i);
    }
  }

  std::vector<double> all_scores;
  all_scores.reserve(all.size());
  for (const auto& c : all) {
    all_scores.push_back(c.score);
    out.scored_prompts.push_back(c.prompt.raw());
  }
  auto best = argmin_if(std::span<const double>(all_scores),
                        [&](std::size_t i) { return stealth.ok(all[i].prompt); });
  if (!best) {
    throw Error(ErrorCode::kStealthViolation,
                "no inserted candidate satisfies the similarity floors");
  }
  r.adversarial = all[*best].prompt;
  r.post_score = all[*best].score;
  r.word_edits = all[*best].edits;
  finish_result(r, cfg, stealth, session);
  return out;
}

}  // namespace detail

/// Deletion saliency: s_i = f(X) - f(X without word i). Issues |X| + 1
/// queries (fewer if two deletions coincide).
inline ImportanceRanking word_importance(const Prompt& x, const AttackConfig& cfg,
                                         ScorerClient& client, Trace* trace = nullptr) {
  detail::AttackSession session(x, cfg, client, trace);
  return detail::rank_importance(x, session);
}

/// Greedy synonym substitution. Words are visited in descending importance;
/// each visit batch-scores the filtered synonyms of that word (candidates
/// that would break the similarity floors are not scored). If any candidate
/// reaches score <= tau * pre, the one most similar to the original is
/// committed and the attack stops. Otherwise the lowest-scoring candidate
/// is committed when it improves on the current prompt, and the walk moves
/// on. At most `max_word_edits` substitutions are made.
inline AttackResult attack_substitution(const Prompt& x, const AttackConfig& cfg,
                                        ScorerClient& client, const Lexicon& lexicon,
                                        const Embedder& embedder = builtin_embedder(),
                                        Trace* trace = nullptr) {
  cfg.validate();
  detail::AttackSession session(x, cfg, client, trace);
  detail::StealthCheck stealth{x, cfg, embedder};

  AttackResult r;
  r.attack = "substitution";
  r.objective = cfg.objective;
  r.original = x;

  const ImportanceRanking ranking = detail::rank_importance(x, session);
  r.pre_score = ranking.baseline_score;
  const double target = cfg.tau_value() * r.pre_score;

  Prompt current = x;
  double current_score = r.pre_score;
  bool any_candidates = false;
  bool reached = false;
  const std::size_t limit = cfg.substitution_limit();

  for (const auto& entry : ranking.entries) {
    if (r.word_edits.size() >= limit || reached) break;
    const std::string& head = x[entry.index];
    const auto filtered =
        filter_candidates(head, lexicon.synonyms.lookup(head), cfg.theta, embedder,
                          lexicon.stopwords, lexicon.pos);
    if (filtered.empty()) continue;
    any_candidates = true;

    std::vector<EditOp> ops;
    std::vector<Prompt> prompts;
    for (const auto& c : filtered) {
      EditOp op = EditOp::substitute(entry.index, c.word);
      Prompt p = apply_edit(current, op);
      if (!stealth.ok(p)) continue;
      ops.push_back(std::move(op));
      prompts.push_back(std::move(p));
    }
    if (prompts.empty()) continue;
    const auto scores = session.score_batch(prompts, "substitution");

    std::optional<std::size_t> pick;
    double pick_similarity = 0;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      if (!(scores[i] <= target)) continue;
      const double sim = stealth.semantic(prompts[i]);
      if (!pick || sim > pick_similarity) {
        pick = i;
        pick_similarity = sim;
      }
    }
    if (pick) {
      reached = true;
    } else {
      pick = argmin_if(std::span<const double>(scores), [](std::size_t) { return true; });
      if (!(scores[*pick] < current_score)) continue;
    }
    current = prompts[*pick];
    current_score = scores[*pick];
    r.word_edits.push_back(ops[*pick]);
  }

  stealth.require(current);
  r.adversarial = current;
  r.post_score = current_score;
  if (!any_candidates) r.outcome = AttackOutcome::kNoCandidates;
  detail::finish_result(r, cfg, stealth, session);
  return r;
}

/// Multi-level prefix insertion. Level 1 scores q1 sampled words inserted at
/// the configured position and keeps the k1 lowest scores; each later level
/// samples q_i fresh words per retained sequence, inserts them in front of
/// the existing inserted words, and keeps the k_i best of the pooled level.
/// The result is the lowest-scoring prompt seen at any level that satisfies
/// the similarity floors.
inline AttackResult attack_insertion(const Prompt& x, const AttackConfig& cfg,
                                     const Vocabulary& vocab, ScorerClient& client,
                                     const Embedder& embedder = builtin_embedder(),
                                     Trace* trace = nullptr) {
  SplitMix64 rng(cfg.seed);
  return detail::run_insertion(x, cfg, vocab, client, embedder, trace, rng,
                               "insertion")
      .result;
}

/// Insertion followed by `char_perturb_queries` single-character variants
/// of the inserted words. Per variant the run RNG draws, in order: which
/// inserted word (only when there are several), the perturbation kind among
/// those applicable, then the perturbation itself. Variants that repeat an
/// already-scored prompt are redrawn. The unperturbed insertion result
/// competes with the variants and wins ties.
inline AttackResult attack_insertion_plus(const Prompt& x, const AttackConfig& cfg,
                                          const Vocabulary& vocab, ScorerClient& client,
                                          const Embedder& embedder = builtin_embedder(),
                                          Trace* trace = nullptr) {
  SplitMix64 rng(cfg.seed);
  auto base = detail::run_insertion(x, cfg, vocab, client, embedder, trace, rng,
                                    "insertion_plus");
  AttackResult r = std::move(base.result);
  if (cfg.char_perturb_queries == 0) return r;

  detail::StealthCheck stealth{x, cfg, embedder};
  const std::size_t inserted = r.word_edits.size();
  const std::size_t at = base.insert_at;
  std::set<std::string> seen(base.scored_prompts.begin(), base.scored_prompts.end());
  seen.insert(x.raw());

  std::vector<Prompt> variants;
  std::vector<CharEditRecord> records;
  const std::size_t max_attempts = 64;
  for (std::size_t v = 0; v < cfg.char_perturb_queries; ++v) {
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
      const std::size_t token = at + (inserted > 1 ? rng.uniform(inserted) : 0);
      const std::string& word = r.adversarial[token];
      const auto kinds = applicable_kinds(word);
      const auto kind = kinds[rng.uniform(kinds.size())];
      const CharPerturbation plan = plan_char_perturbation(word, kind, rng);
      std::string changed = apply_char_perturbation(word, plan);
      if (changed.find_first_of(" \t\r\n") != std::string::npos) continue;
      Prompt p = apply_edit(r.adversarial, EditOp::substitute(token, changed));
      if (!seen.insert(p.raw()).second) continue;
      variants.push_back(std::move(p));
      records.push_back({token, plan, word, std::move(changed)});
      break;
    }
  }
  if (variants.empty()) return r;

  // Re-open the session so the ledger delta covers the char phase too.
  const std::size_t charged_before = r.queries_used;
  const std::size_t wire_before = r.wire_queries;
  detail::AttackSession session(x, cfg, client, trace);
  const auto scores = session.score_batch(variants, "char_perturb");
  std::optional<std::size_t> best;
  double best_score = r.post_score;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    if (scores[i] < best_score && stealth.ok(variants[i])) {
      best = i;
      best_score = scores[i];
    }
  }
  if (best) {
    r.adversarial = variants[*best];
    r.post_score = scores[*best];
    r.char_edits.push_back(records[*best]);
  }
  detail::finish_result(r, cfg, stealth, session);
  r.queries_used += charged_before;
  r.wire_queries += wire_before;
  return r;
}

enum class ProbePosition { kFirst, kImportant };

/// One random edit of `kind` at the first word or at the most important
/// word, scored once. Random words come from `vocab`; Reordering swaps the
/// target with a uniformly chosen other word. No stealth floors apply.
inline AttackResult random_edit_probe(const Prompt& x, EditKind kind,
                                      ProbePosition position, const AttackConfig& cfg,
                                      const Vocabulary& vocab, ScorerClient& client,
                                      const Embedder& embedder = builtin_embedder(),
                                      Trace* trace = nullptr) {
  SplitMix64 rng(cfg.seed);
  detail::AttackSession session(x, cfg, client, trace);
  detail::StealthCheck stealth{x, cfg, embedder};

  AttackResult r;
  r.attack = std::string("probe_") + std::string(to_string(kind)) +
             (position == ProbePosition::kFirst ? "_first" : "_important");
  r.objective = cfg.objective;
  r.original = x;

  std::size_t target = 0;
  if (position == ProbePosition::kImportant) {
    const auto ranking = detail::rank_importance(x, session);
    r.pre_score = ranking.baseline_score;
    target = ranking.entries.front().index;
  } else {
    r.pre_score = session.uncharged_baseline();
  }

  EditOp op;
  switch (kind) {
    case EditKind::kSubstitution:
      op = EditOp::substitute(target, vocab.words[rng.uniform(vocab.words.size())]);
      break;
    case EditKind::kInsertion:
      op = EditOp::insert(target, vocab.words[rng.uniform(vocab.words.size())]);
      break;
    case EditKind::kDeletion:
      op = EditOp::remove(target);
      break;
    case EditKind::kReordering: {
      if (x.size() < 2) {
        throw Error(ErrorCode::kPromptTooShort, "reordering needs two words");
      }
      const std::size_t other = rng.uniform(x.size() - 1);
      op = EditOp::reorder(target, other < target ? other : other + 1);
      break;
    }
  }
  r.adversarial = apply_edit(x, op);
  r.word_edits.push_back(op);
  r.post_score = session.score(r.adversarial, "probe");
  detail::finish_result(r, cfg, stealth, session);
  return r;
}

}  // namespace t2va
