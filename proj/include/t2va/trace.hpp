// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "t2va/error.hpp"
#include "t2va/protocol.hpp"

namespace t2va {

/// One scored prompt, cached or not.
struct TraceRecord {
  std::size_t query_index = 0;
  std::string phase;
  std::string prompt;
  Objective objective = Objective::kSemantic;
  double score = 0;
  bool cached = false;

  Json to_json() const {
    Json j;
    j["query_index"] = query_index;
    j["phase"] = phase;
    j["prompt"] = prompt;
    j["objective"] = std::string(to_string(objective));
    j["score"] = score;
    j["cached"] = cached;
    return j;
  }
};

/// JSONL attack trace: one line per scored prompt, then a final
/// {"phase":"result","result":{...}} line.
class Trace {
 public:
  void add(std::string phase, std::string prompt, Objective objective,
           double score, bool cached) {
    records_.push_back(TraceRecord{records_.size(), std::move(phase),
                                   std::move(prompt), objective, score, cached});
  }

  void set_result(Json result) { result_ = std::move(result); }

  const std::vector<TraceRecord>& records() const { return records_; }
  const Json& result() const { return result_; }

  void write_jsonl(std::ostream& out) const {
    for (const auto& r : records_) out << r.to_json().dump() << '\n';
    if (!result_.is_null()) {
      Json last;
      last["phase"] = "result";
      last["result"] = result_;
      out << last.dump() << '\n';
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
    write_jsonl(out);
    if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path);
  }

  static Trace read_jsonl(std::istream& in) {
    Trace t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      Json j = Json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::kMalformedTrace,
                    "line " + std::to_string(line_no) + " is not a JSON object");
      }
      try {
        const std::string phase = j.at("phase").get<std::string>();
        if (phase == "result") {
          t.result_ = j.at("result");
          continue;
        }
        auto obj = parse_objective(j.at("objective").get<std::string>());
        if (!obj) throw Error(ErrorCode::kMalformedTrace, "unknown objective");
        TraceRecord r{j.at("query_index").get<std::size_t>(), phase,
                      j.at("prompt").get<std::string>(), *obj,
                      j.at("score").get<double>(), j.value("cached", false)};
        t.records_.push_back(std::move(r));
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::kMalformedTrace,
                    "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    return t;
  }

  static Trace load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kFileNotFound, path);
    return read_jsonl(in);
  }

 private:
  std::vector<TraceRecord> records_;
  Json result_;
};

}  // namespace t2va
