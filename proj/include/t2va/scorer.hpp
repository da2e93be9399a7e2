// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "t2va/error.hpp"
#include "t2va/mock_victim.hpp"
#include "t2va/protocol.hpp"
#include "t2va/textsim.hpp"

namespace t2va {

/// Moves one request to the victim and returns the raw reply text. `op` is
/// "score", "embed" or "health"; `body` never contains the op field.
/// Implementations throw Error(kTransport) when nothing could be exchanged.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string exchange(std::string_view op, const Json& body) = 0;
};

/// Calls a MockVictim directly. Thread-safe because MockVictim is.
class InProcessTransport : public Transport {
 public:
  explicit InProcessTransport(std::shared_ptr<MockVictim> victim)
      : victim_(std::move(victim)) {}

  std::string exchange(std::string_view op, const Json& body) override {
    Json request;
    request["op"] = std::string(op);
    for (const auto& [k, v] : body.items()) request[k] = v;
    return victim_->handle(request).dump();
  }

  MockVictim& victim() { return *victim_; }

 private:
  std::shared_ptr<MockVictim> victim_;
};

struct ClientOptions {
  int max_retries = 3;
  std::chrono::milliseconds backoff{50};
  std::size_t parallel = 1;
  bool cache = true;
};

struct ScoreRequest {
  std::string prompt;
  std::string original_prompt;
  Objective objective = Objective::kSemantic;
  std::uint64_t seed = 0;
};

struct ScoreOutcome {
  double score = 0;
  bool cached = false;
};

struct QueryLedger {
  std::size_t unique_queries = 0;
  std::size_t cache_hits = 0;
  std::size_t wire_requests = 0;  // includes repeats when the cache is off
  std::map<std::string, std::size_t> unique_by_phase;
  std::map<std::string, std::size_t> hits_by_phase;
};

/// The only path to the victim. Caches by (prompt, original prompt,
/// objective, seed); cache hits are not queries.
class ScorerClient {
 public:
  explicit ScorerClient(std::shared_ptr<Transport> transport,
                        ClientOptions options = {})
      : transport_(std::move(transport)), options_(options) {
    if (options_.parallel == 0) options_.parallel = 1;
  }

  const ClientOptions& options() const { return options_; }

  HealthInfo health() {
    return with_retries("health", [&] {
      return parse_health_reply(transport_->exchange("health", Json::object()));
    });
  }

  ScoreOutcome score(const ScoreRequest& request,
                     const std::string& phase = "score") {
    return batch_score({request}, phase).front();
  }

  double score(std::string_view prompt, Objective objective, std::uint64_t seed) {
    return score(ScoreRequest{std::string(prompt), std::string(prompt),
                              objective, seed})
        .score;
  }

  /// Scores aligned with `requests`. Ids are assigned in input order before
  /// dispatch and results are committed in input order, so outputs and the
  /// ledger never depend on which reply arrives first.
  std::vector<ScoreOutcome> batch_score(const std::vector<ScoreRequest>& requests,
                                        const std::string& phase = "score") {
    if (requests.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "batch_score needs at least one prompt");
    }
    struct Job {
      Key key;
      ScoreQuery query;
      std::optional<double> score;
      std::exception_ptr error;
    };
    std::vector<ScoreOutcome> out(requests.size());
    std::vector<std::ptrdiff_t> slot(requests.size(), -1);  // job index
    std::vector<Job> jobs;
    {
      std::lock_guard lock(mu_);
      std::map<Key, std::size_t> pending;
      for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& r = requests[i];
        Key key{r.prompt, r.original_prompt, r.objective, r.seed};
        if (options_.cache) {
          if (auto it = cache_.find(key); it != cache_.end()) {
            out[i] = {it->second, true};
            continue;
          }
          if (auto it = pending.find(key); it != pending.end()) {
            slot[i] = static_cast<std::ptrdiff_t>(it->second);
            continue;
          }
          pending.emplace(key, jobs.size());
        }
        slot[i] = static_cast<std::ptrdiff_t>(jobs.size());
        jobs.push_back(Job{key,
                           ScoreQuery{next_id('q'), r.objective, r.prompt,
                                      r.original_prompt, r.seed},
                           std::nullopt, nullptr});
      }
    }

    run_parallel(jobs.size(), [&](std::size_t j) {
      try {
        jobs[j].score = send_score(jobs[j].query);
      } catch (...) {
        jobs[j].error = std::current_exception();
      }
    });
    for (const auto& job : jobs)
      if (job.error) std::rethrow_exception(job.error);

    std::lock_guard lock(mu_);
    std::vector<bool> first_use(jobs.size(), true);
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (slot[i] < 0) {
        ++ledger_.cache_hits;
        ++ledger_.hits_by_phase[phase];
        continue;
      }
      const auto j = static_cast<std::size_t>(slot[i]);
      const Job& job = jobs[j];
      if (!first_use[j]) {
        out[i] = {*job.score, true};
        ++ledger_.cache_hits;
        ++ledger_.hits_by_phase[phase];
        continue;
      }
      first_use[j] = false;
      out[i] = {*job.score, false};
      ++ledger_.wire_requests;
      if (seen_.insert(job.key).second) {
        ++ledger_.unique_queries;
        ++ledger_.unique_by_phase[phase];
      }
      if (options_.cache) cache_.emplace(job.key, *job.score);
    }
    return out;
  }

  /// Remote sentence embedding. Requires the endpoint to advertise embed.
  EmbeddingVector embed_remote(std::string_view text) {
    const HealthInfo h = cached_health();
    if (!h.embed) {
      throw Error(ErrorCode::kCapabilityMissing, "endpoint does not offer embed");
    }
    {
      std::lock_guard lock(mu_);
      if (auto it = embeddings_.find(std::string(text)); it != embeddings_.end())
        return it->second;
    }
    Json body;
    std::string id;
    {
      std::lock_guard lock(mu_);
      id = next_id('e');
    }
    body["id"] = id;
    body["text"] = std::string(text);
    EmbeddingVector v = with_retries("embed", [&] {
      return parse_embed_reply(transport_->exchange("embed", body), id);
    });
    if (h.embed_dim != 0 && v.size() != h.embed_dim) {
      throw Error(ErrorCode::kMalformedResponse,
                  "embedding dimension " + std::to_string(v.size()) +
                      " != advertised " + std::to_string(h.embed_dim));
    }
    std::lock_guard lock(mu_);
    embeddings_.emplace(std::string(text), v);
    return v;
  }

  Embedder remote_embedder() {
    return [this](std::string_view text) { return embed_remote(text); };
  }

  QueryLedger ledger() const {
    std::lock_guard lock(mu_);
    return ledger_;
  }

 private:
  using Key = std::tuple<std::string, std::string, Objective, std::uint64_t>;

  std::string next_id(char prefix) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%08llu", prefix,
                  static_cast<unsigned long long>(++id_counter_));
    return buf;
  }

  HealthInfo cached_health() {
    {
      std::lock_guard lock(mu_);
      if (health_) return *health_;
    }
    HealthInfo h = health();
    std::lock_guard lock(mu_);
    health_ = h;
    return h;
  }

  double send_score(const ScoreQuery& q) {
    return with_retries("score", [&] {
      return parse_score_reply(transport_->exchange("score", q.to_json()), q.id)
          .score;
    });
  }

  /// Transport and malformed-reply failures are retried with the same
  /// request (same id) up to max_retries times, exponential backoff.
  template <typename Fn>
  auto with_retries(std::string_view what, Fn&& fn) -> decltype(fn()) {
    std::optional<Error> last;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      if (attempt > 0 && options_.backoff.count() > 0) {
        std::this_thread::sleep_for(options_.backoff * (1 << (attempt - 1)));
      }
      try {
        return fn();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kTransport &&
            e.code() != ErrorCode::kMalformedResponse) {
          throw;
        }
        last = e;
      }
    }
    throw Error(last->code(), std::string(what) + " failed after " +
                                  std::to_string(options_.max_retries) +
                                  " retries: " + last->what());
  }

  template <typename Fn>
  void run_parallel(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min(options_.parallel, n);
    if (workers <= 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::shared_ptr<Transport> transport_;
  ClientOptions options_;
  mutable std::mutex mu_;
  std::uint64_t id_counter_ = 0;
  std::map<Key, double> cache_;
  std::set<Key> seen_;
  QueryLedger ledger_;
  std::optional<HealthInfo> health_;
  std::unordered_map<std::string, EmbeddingVector> embeddings_;
};

}  // namespace t2va
