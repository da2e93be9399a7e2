// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>

#include "t2va/error.hpp"
#include "t2va/prompt.hpp"
#include "t2va/protocol.hpp"
#include "t2va/random.hpp"
#include "t2va/textsim.hpp"

namespace t2va {

struct MockVictimSpec {
  /// Lowercased word -> motion contribution. Negative weights model
  /// motion-suppressing words.
  std::map<std::string, double> motion_weights;
  double jitter_amplitude = 0;
  std::uint64_t jitter_seed = 0;

  void validate() const {
    if (!(jitter_amplitude >= 0) || !std::isfinite(jitter_amplitude)) {
      throw Error(ErrorCode::kInvalidConfig, "jitter_amplitude must be >= 0");
    }
    for (const auto& [w, v] : motion_weights) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidConfig, "non-finite weight for " + w);
      }
    }
  }

  static MockVictimSpec from_json(const Json& j) {
    MockVictimSpec s;
    try {
      if (j.contains("motion_weights")) {
        for (const auto& [k, v] : j["motion_weights"].items()) {
          std::string key = k;
          for (auto& c : key)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
          s.motion_weights[key] = v.get<double>();
        }
      }
      s.jitter_amplitude = j.value("jitter_amplitude", 0.0);
      s.jitter_seed = j.value("jitter_seed", std::uint64_t{0});
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kInvalidConfig, e.what());
    }
    s.validate();
    return s;
  }

  static MockVictimSpec load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kFileNotFound, path);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kInvalidConfig, "bad JSON in " + path);
    return from_json(j);
  }

  Json to_json() const {
    Json j;
    Json w = Json::object();
    for (const auto& [k, v] : motion_weights) w[k] = v;
    j["motion_weights"] = w;
    j["jitter_amplitude"] = jitter_amplitude;
    j["jitter_seed"] = jitter_seed;
    return j;
  }
};

/// Hash-derived offset in [-amplitude, +amplitude]; independent of query
/// order by construction.
inline double mock_jitter(const MockVictimSpec& spec, std::string_view raw) {
  if (spec.jitter_amplitude == 0) return 0;
  const std::uint64_t h = SplitMix64::mix(fnv1a64(raw) ^ spec.jitter_seed);
  const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
  return spec.jitter_amplitude * (2 * unit - 1);
}

inline double mock_semantic_score(const MockVictimSpec& spec,
                                  std::string_view original,
                                  std::string_view adversarial) {
  const double c = cosine(embed_text(original), embed_text(adversarial));
  const double s = 100.0 * std::clamp(c, 0.0, 1.0) + mock_jitter(spec, adversarial);
  return std::clamp(s, 0.0, 100.0);
}

inline double mock_semantic_score(const MockVictimSpec& spec,
                                  const Prompt& original,
                                  const Prompt& adversarial) {
  return mock_semantic_score(spec, original.raw(), adversarial.raw());
}

inline double mock_temporal_score(const MockVictimSpec& spec,
                                  const Prompt& adversarial) {
  double sum = 0;
  for (const auto& t : adversarial.tokens()) {
    std::string key = t;
    for (auto& c : key)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto it = spec.motion_weights.find(key);
    if (it != spec.motion_weights.end()) sum += it->second;
  }
  return std::max(0.0, std::max(0.0, sum) + mock_jitter(spec, adversarial.raw()));
}

/// Request counters exposed for ledger cross-checks.
struct MockCounters {
  std::size_t score_requests = 0;     // fresh ids
  std::size_t duplicate_ids = 0;      // replays served from the id cache
  std::size_t distinct_triples = 0;   // distinct (prompt, original, objective, seed)
  std::size_t embed_requests = 0;
  std::size_t health_requests = 0;
  std::size_t error_replies = 0;
};

/// Deterministic victim speaking the scorer protocol. Requests carry an
/// "op" field ("score" | "embed" | "health"), as on the stdio transport.
class MockVictim {
 public:
  explicit MockVictim(MockVictimSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
  }

  const MockVictimSpec& spec() const { return spec_; }

  HealthInfo health() const {
    return HealthInfo{"ok", {"semantic", "temporal"}, true, kEmbeddingDim};
  }

  double score(const ScoreQuery& q) const {
    if (q.objective == Objective::kSemantic) {
      return mock_semantic_score(spec_, q.original_prompt, q.prompt);
    }
    return mock_temporal_score(spec_, tokenize(q.prompt));
  }

  Json handle(const Json& request) {
    const std::string op = request.value("op", std::string{});
    try {
      if (op == "health") {
        std::lock_guard lock(mu_);
        ++counters_.health_requests;
        return health().to_json();
      }
      if (op == "score") return handle_score(request);
      if (op == "embed") return handle_embed(request);
      return error_reply(request, "unknown op '" + op + "'");
    } catch (const Error& e) {
      return error_reply(request, e.what());
    } catch (const Json::exception& e) {
      return error_reply(request, e.what());
    }
  }

  /// One newline-delimited request in, one reply line out (no newline).
  std::string handle_line(std::string_view line) {
    Json request = Json::parse(line, nullptr, false);
    if (request.is_discarded() || !request.is_object()) {
      return error_reply(Json::object(), "request is not a JSON object").dump();
    }
    return handle(request).dump();
  }

  /// Serves until EOF on `in`.
  void serve_stdio(std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      out << handle_line(line) << '\n' << std::flush;
    }
  }

  MockCounters counters() const {
    std::lock_guard lock(mu_);
    return counters_;
  }

  void reset_counters() {
    std::lock_guard lock(mu_);
    counters_ = {};
    triples_.clear();
  }

 private:
  Json handle_score(const Json& request) {
    const ScoreQuery q = ScoreQuery::from_json(request);
    if (q.prompt.find_first_not_of(" \t\r\n") == std::string::npos) {
      return error_reply(request, "empty prompt");
    }
    {
      std::lock_guard lock(mu_);
      auto it = replies_.find(q.id);
      if (it != replies_.end()) {
        ++counters_.duplicate_ids;
        return it->second;
      }
    }
    ScoreResponse r{q.id, score(q), Json()};
    Json reply = r.to_json();
    std::lock_guard lock(mu_);
    auto [it, inserted] = replies_.emplace(q.id, reply);
    if (!inserted) {
      ++counters_.duplicate_ids;
      return it->second;
    }
    ++counters_.score_requests;
    if (triples_.emplace(q.prompt, q.original_prompt, to_string(q.objective), q.seed)
            .second) {
      ++counters_.distinct_triples;
    }
    return reply;
  }

  Json handle_embed(const Json& request) {
    const std::string id = request.at("id").get<std::string>();
    const std::string text = request.at("text").get<std::string>();
    Json j;
    j["id"] = id;
    j["vector"] = embed_text(text);
    std::lock_guard lock(mu_);
    ++counters_.embed_requests;
    return j;
  }

  Json error_reply(const Json& request, const std::string& message) {
    Json j;
    if (request.is_object() && request.contains("id")) j["id"] = request["id"];
    j["error"] = message;
    std::lock_guard lock(mu_);
    ++counters_.error_replies;
    return j;
  }

  MockVictimSpec spec_;
  mutable std::mutex mu_;
  MockCounters counters_;
  std::unordered_map<std::string, Json> replies_;
  std::set<std::tuple<std::string, std::string, std::string_view, std::uint64_t>>
      triples_;
};

}  // namespace t2va
