// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#include "t2va/mock_victim.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

namespace t2va {
namespace {

using testing::motion_spec;
using testing::oracle_bucket;

TEST(MockSemantic, IdenticalPromptScoresFullMarks) {
  EXPECT_DOUBLE_EQ(mock_semantic_score({}, "a horse galloping", "a horse galloping"), 100.0);
}

TEST(MockSemantic, OneOfTwoWordsSubstituted) {
  ASSERT_NE(oracle_bucket("horse"), oracle_bucket("galloping"));
  ASSERT_NE(oracle_bucket("horse"), oracle_bucket("trotting"));
  ASSERT_NE(oracle_bucket("galloping"), oracle_bucket("trotting"));
  EXPECT_NEAR(mock_semantic_score({}, "horse galloping", "horse trotting"), 50.0, 1e-9);
}

TEST(MockSemantic, DisjointPromptsNearZero) {
  const std::set<std::size_t> a{oracle_bucket("horse"), oracle_bucket("galloping")};
  const std::set<std::size_t> b{oracle_bucket("ocean"), oracle_bucket("waves")};
  std::vector<std::size_t> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  ASSERT_TRUE(both.empty());
  EXPECT_DOUBLE_EQ(mock_semantic_score({}, "horse galloping", "ocean waves"), 0.0);
}

TEST(MockTemporal, Examples) {
  const auto spec = motion_spec({{"galloping", 12}, {"fast", 3}, {"frozen", -12}});
  EXPECT_DOUBLE_EQ(mock_temporal_score(spec, tokenize("horse galloping fast")), 15.0);
  EXPECT_DOUBLE_EQ(mock_temporal_score(spec, tokenize("horse meadow")), 0.0);
  EXPECT_DOUBLE_EQ(mock_temporal_score(spec, tokenize("horse galloping frozen")), 0.0);
  EXPECT_DOUBLE_EQ(mock_temporal_score(spec, tokenize("Horse GALLOPING")), 12.0);
}

TEST(MockJitter, BoundedAndDeterministic) {
  MockVictimSpec spec;
  spec.jitter_amplitude = 2.5;
  spec.jitter_seed = 4;
  SplitMix64 rng(8);
  for (int i = 0; i < 500; ++i) {
    const auto text = testing::ref_join(testing::random_words(rng, 3));
    const double j = mock_jitter(spec, text);
    EXPECT_LE(std::abs(j), 2.5);
    EXPECT_EQ(j, mock_jitter(spec, text));
    const double s = mock_semantic_score(spec, text, text);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 100.0);
  }
}

TEST(MockVictimSpec, RejectsNegativeAmplitude) {
  Json j;
  j["jitter_amplitude"] = -1;
  EXPECT_THROW(MockVictimSpec::from_json(j), Error);
}

TEST(MockVictimProtocol, Health) {
  MockVictim v({});
  const Json reply = v.handle(Json{{"op", "health"}});
  EXPECT_EQ(reply["objectives"], Json::array({"semantic", "temporal"}));
  EXPECT_EQ(reply["embed"], true);
  EXPECT_EQ(reply["embed_dim"], 256);
  EXPECT_EQ(reply["status"], "ok");
  EXPECT_EQ(v.counters().health_requests, 1u);
}

TEST(MockVictimProtocol, DuplicateIdReplaysIdenticalScore) {
  MockVictim v(motion_spec({{"galloping", 12}}));
  Json req{{"op", "score"}, {"id", "q1"}, {"objective", "temporal"},
           {"prompt", "horse galloping"}, {"original_prompt", "horse galloping"},
           {"seed", 0}};
  const Json first = v.handle(req);
  const Json second = v.handle(req);
  EXPECT_EQ(first, second);
  EXPECT_DOUBLE_EQ(first["score"].get<double>(), 12.0);
  EXPECT_EQ(v.counters().score_requests, 1u);
  EXPECT_EQ(v.counters().duplicate_ids, 1u);
}

TEST(MockVictimProtocol, UnknownOpAndGarbageKeepServing) {
  MockVictim v({});
  std::istringstream in(
      "{\"op\":\"dance\",\"id\":\"x\"}\n"
      "not json\n"
      "{\"op\":\"score\",\"id\":\"q2\",\"objective\":\"semantic\",\"prompt\":\"a b\","
      "\"original_prompt\":\"a b\",\"seed\":0}\n");
  std::ostringstream out;
  v.serve_stdio(in, out);
  std::istringstream lines(out.str());
  std::string l1, l2, l3;
  std::getline(lines, l1);
  std::getline(lines, l2);
  std::getline(lines, l3);
  EXPECT_TRUE(Json::parse(l1).contains("error"));
  EXPECT_EQ(Json::parse(l1)["id"], "x");
  EXPECT_TRUE(Json::parse(l2).contains("error"));
  EXPECT_DOUBLE_EQ(Json::parse(l3)["score"].get<double>(), 100.0);
  EXPECT_EQ(v.counters().error_replies, 2u);
}

TEST(MockVictimProtocol, EmbedMatchesBuiltin) {
  MockVictim v({});
  const Json reply = v.handle(Json{{"op", "embed"}, {"id", "e1"}, {"text", "red fox"}});
  EXPECT_EQ(reply["vector"].get<std::vector<double>>(), embed_text("red fox"));
}

}  // namespace
}  // namespace t2va
