// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "httplib.h"
#include "t2va/error.hpp"
#include "t2va/mock_victim.hpp"
#include "t2va/scorer.hpp"

namespace t2va {

/// POST /v1/score, POST /v1/embed, GET /v1/health.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::string base_url, int timeout_seconds = 600)
      : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  }

  std::string exchange(std::string_view op, const Json& body) override {
    httplib::Client client(base_url_);
    client.set_connection_timeout(5);
    client.set_read_timeout(timeout_seconds_);
    httplib::Result res;
    if (op == "health") {
      res = client.Get("/v1/health");
    } else if (op == "score" || op == "embed") {
      res = client.Post("/v1/" + std::string(op), body.dump(), "application/json");
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown op " + std::string(op));
    }
    if (!res) {
      throw Error(ErrorCode::kTransport,
                  base_url_ + ": " + httplib::to_string(res.error()));
    }
    if (res->status >= 500) {
      throw Error(ErrorCode::kTransport,
                  base_url_ + ": HTTP " + std::to_string(res->status));
    }
    return res->body;
  }

 private:
  std::string base_url_;
  int timeout_seconds_;
};

/// Mounts a MockVictim on an httplib server using the HTTP routes above.
inline void mount_mock_routes(httplib::Server& server,
                              std::shared_ptr<MockVictim> victim) {
  auto dispatch = [victim](const std::string& op, const std::string& body,
                           httplib::Response& res) {
    Json request = body.empty() ? Json::object() : Json::parse(body, nullptr, false);
    if (request.is_discarded() || !request.is_object()) {
      res.status = 400;
      res.set_content(R"({"error":"request is not a JSON object"})",
                      "application/json");
      return;
    }
    request["op"] = op;
    Json reply = victim->handle(request);
    if (reply.contains("error")) res.status = 400;
    res.set_content(reply.dump(), "application/json");
  };
  server.Get("/v1/health", [dispatch](const httplib::Request&, httplib::Response& res) {
    dispatch("health", "", res);
  });
  server.Post("/v1/score", [dispatch](const httplib::Request& req, httplib::Response& res) {
    dispatch("score", req.body, res);
  });
  server.Post("/v1/embed", [dispatch](const httplib::Request& req, httplib::Response& res) {
    dispatch("embed", req.body, res);
  });
}

}  // namespace t2va
