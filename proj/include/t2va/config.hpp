// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "t2va/error.hpp"
#include "t2va/lexicon.hpp"
#include "t2va/protocol.hpp"

namespace t2va {

/// Multi-level insertion schedule: q[i] words sampled per retained
/// sequence at level i, k[i] sequences retained after level i.
struct Schedule {
  std::vector<std::size_t> q{64};
  std::vector<std::size_t> k;

  /// Q = q1 + k1*q2 + ... + k_{n-1}*q_n
  std::size_t budget() const {
    std::size_t total = q.empty() ? 0 : q[0];
    for (std::size_t i = 1; i < q.size(); ++i) total += k[i - 1] * q[i];
    return total;
  }

  std::size_t levels() const { return q.size(); }

  void validate() const {
    if (q.empty()) throw Error(ErrorCode::kInvalidConfig, "schedule needs q1");
    if (k.size() + 1 != q.size()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "schedule has " + std::to_string(q.size()) + " levels but " +
                      std::to_string(k.size()) + " top-k values");
    }
    for (auto v : q)
      if (v == 0) throw Error(ErrorCode::kInvalidConfig, "q values must be >= 1");
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (k[i] == 0 || k[i] > q[i]) {
        throw Error(ErrorCode::kInvalidConfig,
                    "k" + std::to_string(i + 1) + " must be in [1, q" +
                        std::to_string(i + 1) + "]");
      }
    }
  }

  /// Grammar: `q1[,q2,...][/k1[,k2,...]]`.
  static Schedule parse(std::string_view text) {
    auto parse_list = [&](std::string_view part) {
      std::vector<std::size_t> out;
      if (part.empty()) return out;
      for (const auto& item : detail::split(part, ',')) {
        auto t = detail::trim(item);
        if (t.empty() ||
            t.find_first_not_of("0123456789") != std::string_view::npos) {
          throw Error(ErrorCode::kInvalidConfig,
                      "malformed schedule '" + std::string(text) + "'");
        }
        out.push_back(std::stoul(std::string(t)));
      }
      return out;
    };
    Schedule s;
    const auto slash = text.find('/');
    s.q = parse_list(text.substr(0, slash));
    s.k = slash == std::string_view::npos ? std::vector<std::size_t>{}
                                          : parse_list(text.substr(slash + 1));
    s.validate();
    return s;
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < q.size(); ++i)
      out += (i ? "," : "") + std::to_string(q[i]);
    if (!k.empty()) {
      out += "/";
      for (std::size_t i = 0; i < k.size(); ++i)
        out += (i ? "," : "") + std::to_string(k[i]);
    }
    return out;
  }
};

enum class InsertPosition { kFirst, kMiddle, kLast, kRandom, kImportant };

inline std::string_view to_string(InsertPosition p) {
  switch (p) {
    case InsertPosition::kFirst: return "first";
    case InsertPosition::kMiddle: return "middle";
    case InsertPosition::kLast: return "last";
    case InsertPosition::kRandom: return "random";
    case InsertPosition::kImportant: return "important";
  }
  return "first";
}

inline std::optional<InsertPosition> parse_position(std::string_view s) {
  for (auto p : {InsertPosition::kFirst, InsertPosition::kMiddle,
                 InsertPosition::kLast, InsertPosition::kRandom,
                 InsertPosition::kImportant})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

struct AttackConfig {
  Objective objective = Objective::kSemantic;
  double theta = 0.80;
  /// Success ratio; unset means 0.50 for semantic, 0.10 for temporal.
  std::optional<double> tau;
  /// Unset means 3 for substitution; insertion is bounded by the schedule.
  std::optional<std::size_t> max_word_edits;
  Schedule schedule;
  InsertPosition position = InsertPosition::kFirst;
  std::size_t char_perturb_queries = 16;
  double eps_semantic = 0.60;
  double eps_formal = 0.60;
  /// Run RNG seed.
  std::uint64_t seed = 0;
  /// Seed forwarded to the victim with every score query.
  std::uint64_t victim_seed = 0;

  double tau_value() const {
    if (tau) return *tau;
    return objective == Objective::kSemantic ? 0.50 : 0.10;
  }

  std::size_t substitution_limit() const { return max_word_edits.value_or(3); }

  void validate() const {
    auto unit = [](double v, const char* name) {
      if (!(v >= 0 && v <= 1)) {
        throw Error(ErrorCode::kInvalidConfig, std::string(name) + " must be in [0,1]");
      }
    };
    unit(theta, "theta");
    unit(tau_value(), "tau");
    unit(eps_semantic, "eps_semantic");
    unit(eps_formal, "eps_formal");
    schedule.validate();
  }

  Json to_json() const {
    Json j;
    j["objective"] = std::string(to_string(objective));
    j["theta"] = theta;
    j["tau"] = tau_value();
    if (max_word_edits) j["max_word_edits"] = *max_word_edits;
    j["schedule"] = schedule.to_string();
    j["position"] = std::string(to_string(position));
    j["char_perturb_queries"] = char_perturb_queries;
    j["eps_semantic"] = eps_semantic;
    j["eps_formal"] = eps_formal;
    j["seed"] = seed;
    j["victim_seed"] = victim_seed;
    return j;
  }

  /// Fields absent from `j` keep their current values.
  void merge_json(const Json& j) {
    try {
      if (j.contains("objective")) {
        auto o = parse_objective(j["objective"].get<std::string>());
        if (!o) throw Error(ErrorCode::kInvalidConfig, "unknown objective");
        objective = *o;
      }
      if (j.contains("theta")) theta = j["theta"].get<double>();
      if (j.contains("tau")) tau = j["tau"].get<double>();
      if (j.contains("max_word_edits"))
        max_word_edits = j["max_word_edits"].get<std::size_t>();
      if (j.contains("schedule"))
        schedule = Schedule::parse(j["schedule"].get<std::string>());
      if (j.contains("position")) {
        auto p = parse_position(j["position"].get<std::string>());
        if (!p) throw Error(ErrorCode::kInvalidConfig, "unknown position");
        position = *p;
      }
      if (j.contains("char_perturb_queries"))
        char_perturb_queries = j["char_perturb_queries"].get<std::size_t>();
      if (j.contains("eps_semantic")) eps_semantic = j["eps_semantic"].get<double>();
      if (j.contains("eps_formal")) eps_formal = j["eps_formal"].get<double>();
      if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
      if (j.contains("victim_seed")) victim_seed = j["victim_seed"].get<std::uint64_t>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kInvalidConfig, e.what());
    }
  }
};

}  // namespace t2va
