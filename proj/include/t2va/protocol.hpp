// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

// JSON shapes shared by the scorer client, the mock victim and any external
// scorer. Key order on the wire is fixed (ordered_json) so golden request
// fixtures compare byte-for-byte.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "t2va/error.hpp"
#include "t2va/textsim.hpp"

namespace t2va {

using Json = nlohmann::ordered_json;

enum class Objective { kSemantic, kTemporal };

inline std::string_view to_string(Objective o) {
  return o == Objective::kSemantic ? "semantic" : "temporal";
}

inline std::optional<Objective> parse_objective(std::string_view s) {
  if (s == "semantic") return Objective::kSemantic;
  if (s == "temporal") return Objective::kTemporal;
  return std::nullopt;
}

struct ScoreQuery {
  std::string id;
  Objective objective = Objective::kSemantic;
  std::string prompt;
  std::string original_prompt;
  std::uint64_t seed = 0;

  Json to_json() const {
    Json j;
    j["id"] = id;
    j["objective"] = std::string(to_string(objective));
    j["prompt"] = prompt;
    j["original_prompt"] = original_prompt;
    j["seed"] = seed;
    return j;
  }

  /// Throws MalformedResponse on shape errors (used server-side too).
  static ScoreQuery from_json(const Json& j) {
    try {
      ScoreQuery q;
      q.id = j.at("id").get<std::string>();
      auto obj = parse_objective(j.at("objective").get<std::string>());
      if (!obj) throw Error(ErrorCode::kMalformedResponse, "unknown objective");
      q.objective = *obj;
      q.prompt = j.at("prompt").get<std::string>();
      q.original_prompt = j.value("original_prompt", q.prompt);
      q.seed = j.value("seed", std::uint64_t{0});
      return q;
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kMalformedResponse, e.what());
    }
  }
};

struct ScoreResponse {
  std::string id;
  double score = 0;
  Json meta;  // null when absent

  Json to_json() const {
    Json j;
    j["id"] = id;
    j["score"] = score;
    if (!meta.is_null()) j["meta"] = meta;
    return j;
  }
};

struct HealthInfo {
  std::string status;
  std::vector<std::string> objectives;
  bool embed = false;
  std::size_t embed_dim = 0;

  Json to_json() const {
    Json j;
    j["status"] = status;
    j["objectives"] = objectives;
    j["embed"] = embed;
    j["embed_dim"] = embed_dim;
    return j;
  }
};

inline Json parse_reply(std::string_view text) {
  Json j = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kMalformedResponse,
                "reply is not a JSON object: " + std::string(text.substr(0, 200)));
  }
  if (j.contains("error")) {
    throw Error(ErrorCode::kMalformedResponse,
                "scorer error: " + j["error"].dump());
  }
  return j;
}

/// Validates a score reply against the pending id. MalformedResponse for
/// shape problems, NegativeScore for score < 0 or non-finite.
inline ScoreResponse parse_score_reply(std::string_view text,
                                       std::string_view expected_id) {
  Json j = parse_reply(text);
  if (!j.contains("id") || !j["id"].is_string() || !j.contains("score") ||
      !j["score"].is_number()) {
    throw Error(ErrorCode::kMalformedResponse,
                "score reply lacks id/score: " + j.dump());
  }
  ScoreResponse r;
  r.id = j["id"].get<std::string>();
  if (r.id != expected_id) {
    throw Error(ErrorCode::kMalformedResponse,
                "reply id '" + r.id + "' does not match '" +
                    std::string(expected_id) + "'");
  }
  r.score = j["score"].get<double>();
  if (!std::isfinite(r.score) || r.score < 0) {
    throw Error(ErrorCode::kNegativeScore,
                "score " + std::to_string(r.score) + " for id " + r.id);
  }
  if (j.contains("meta")) r.meta = j["meta"];
  return r;
}

inline HealthInfo parse_health_reply(std::string_view text) {
  Json j = parse_reply(text);
  try {
    HealthInfo h;
    h.status = j.at("status").get<std::string>();
    h.objectives = j.value("objectives", std::vector<std::string>{});
    h.embed = j.value("embed", false);
    h.embed_dim = j.value("embed_dim", std::size_t{0});
    return h;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, e.what());
  }
}

inline EmbeddingVector parse_embed_reply(std::string_view text,
                                         std::string_view expected_id) {
  Json j = parse_reply(text);
  if (!j.contains("vector") || !j["vector"].is_array() ||
      j.value("id", std::string{}) != expected_id) {
    throw Error(ErrorCode::kMalformedResponse, "bad embed reply: " + j.dump());
  }
  EmbeddingVector v;
  for (const auto& x : j["vector"]) {
    if (!x.is_number()) {
      throw Error(ErrorCode::kMalformedResponse, "non-numeric vector entry");
    }
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace t2va
