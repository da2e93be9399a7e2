// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#include "t2va/prompt.hpp"

#include <gtest/gtest.h>

#include "support.hpp"

namespace t2va {
namespace {

using testing::oracle_edit_distance;
using testing::oracle_formal;

void ExpectCode(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(Tokenize, SplitsOnWhitespaceRuns) {
  const Prompt p = tokenize("  a  horse\tgalloping\n");
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0], "a");
  EXPECT_EQ(p[1], "horse");
  EXPECT_EQ(p[2], "galloping");
  EXPECT_EQ(p.raw(), "a horse galloping");
}

TEST(Tokenize, EmptyPromptRejected) {
  ExpectCode(ErrorCode::kEmptyPrompt, [] { tokenize(""); });
  ExpectCode(ErrorCode::kEmptyPrompt, [] { tokenize(" \t\n "); });
}

TEST(Tokenize, RoundTripIsIdentityOnNormalizedText) {
  SplitMix64 rng(7);
  for (int i = 0; i < 200; ++i) {
    auto words = testing::random_words(rng, 1 + rng.uniform(10));
    const Prompt p = Prompt::from_tokens(words);
    EXPECT_EQ(tokenize(detokenize(p)), p);
    EXPECT_EQ(tokenize(detokenize(p)).tokens(), words);
  }
}

TEST(ApplyEdit, Examples) {
  const Prompt x = tokenize("a horse galloping");
  EXPECT_EQ(apply_edit(x, EditOp::substitute(1, "pony")).raw(), "a pony galloping");
  EXPECT_EQ(apply_edit(x, EditOp::insert(0, "calm")).raw(), "calm a horse galloping");
  EXPECT_EQ(apply_edit(x, EditOp::insert(3, "fast")).raw(), "a horse galloping fast");
  EXPECT_EQ(apply_edit(x, EditOp::remove(2)).raw(), "a horse");
  EXPECT_EQ(apply_edit(x, EditOp::reorder(0, 2)).raw(), "galloping horse a");
}

TEST(ApplyEdit, Errors) {
  const Prompt x = tokenize("a horse galloping");
  ExpectCode(ErrorCode::kIndexOutOfBounds, [&] { apply_edit(x, EditOp::substitute(3, "z")); });
  ExpectCode(ErrorCode::kIndexOutOfBounds, [&] { apply_edit(x, EditOp::insert(4, "z")); });
  ExpectCode(ErrorCode::kIndexOutOfBounds, [&] { apply_edit(x, EditOp::remove(3)); });
  ExpectCode(ErrorCode::kIndexOutOfBounds, [&] { apply_edit(x, EditOp::reorder(0, 5)); });
  ExpectCode(ErrorCode::kInvalidEdit, [&] { apply_edit(x, EditOp::reorder(1, 1)); });
  ExpectCode(ErrorCode::kDeletionOfOnlyToken,
             [] { apply_edit(tokenize("horse"), EditOp::remove(0)); });
}

TEST(ApplyEdit, LengthArithmeticHolds) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const Prompt p = Prompt::from_tokens(testing::random_words(rng, 2 + rng.uniform(8)));
    const std::size_t n = p.size();
    EXPECT_EQ(apply_edit(p, EditOp::substitute(rng.uniform(n), "zz")).size(), n);
    EXPECT_EQ(apply_edit(p, EditOp::insert(rng.uniform(n + 1), "zz")).size(), n + 1);
    EXPECT_EQ(apply_edit(p, EditOp::remove(rng.uniform(n))).size(), n - 1);
    const std::size_t i = rng.uniform(n);
    const std::size_t j = (i + 1 + rng.uniform(n - 1)) % n;
    const Prompt r = apply_edit(p, EditOp::reorder(i, j));
    EXPECT_EQ(r.size(), n);
    auto a = p.tokens(), b = r.tokens();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
}

TEST(CharPerturb, Examples) {
  using K = CharPerturbKind;
  EXPECT_EQ(apply_char_perturbation("cat", {K::kSymbolReplace, 1, 0}), "c@t");
  EXPECT_EQ(apply_char_perturbation("go", {K::kCharDuplicate, 1, 0}), "goo");
  EXPECT_EQ(apply_char_perturbation("Dog", {K::kCaseFlip, 0, 0}), "dog");
  EXPECT_EQ(apply_char_perturbation("Dog", {K::kCaseFlip, 1, 0}), "DOg");
  EXPECT_EQ(apply_char_perturbation("horse", {K::kCharDelete, 2, 0}), "hose");
  EXPECT_EQ(apply_char_perturbation("horse", {K::kCharReorder, 0, 0}), "ohrse");
  EXPECT_EQ(apply_char_perturbation("horse", {K::kCharInsert, 5, 'y'}), "horsey");
  EXPECT_EQ(apply_char_perturbation("horse", {K::kCharSubstitute, 0, 'm'}), "morse");
  EXPECT_EQ(apply_char_perturbation("SLOW", {K::kSymbolReplace, 0, 0}), "$LOW");
}

TEST(CharPerturb, InapplicableKinds) {
  using K = CharPerturbKind;
  SplitMix64 rng(1);
  ExpectCode(ErrorCode::kInapplicableKind, [&] { perturb_chars("", K::kCharInsert, rng); });
  ExpectCode(ErrorCode::kInapplicableKind, [&] { perturb_chars("a", K::kCharDelete, rng); });
  ExpectCode(ErrorCode::kInapplicableKind, [&] { perturb_chars("aa", K::kCharReorder, rng); });
  ExpectCode(ErrorCode::kInapplicableKind, [&] { perturb_chars("tx", K::kSymbolReplace, rng); });
  ExpectCode(ErrorCode::kInapplicableKind, [&] { perturb_chars("42", K::kCaseFlip, rng); });
  ExpectCode(ErrorCode::kInapplicableKind,
             [&] { apply_char_perturbation("horse", {K::kCharSubstitute, 0, 'h'}); });
  ExpectCode(ErrorCode::kInapplicableKind,
             [&] { apply_char_perturbation("cat", {K::kSymbolReplace, 0, 0}); });
}

TEST(CharPerturb, NeverReturnsInputAndStaysOneEditAway) {
  SplitMix64 words(3);
  SplitMix64 rng(99);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::string w = testing::random_word(words);
    if (trial % 3 == 0) w[0] = static_cast<char>(std::toupper(w[0]));
    for (auto kind : applicable_kinds(w)) {
      const std::string out = perturb_chars(w, kind, rng);
      EXPECT_NE(out, w);
      const std::size_t d = oracle_edit_distance(w, out);
      if (kind == CharPerturbKind::kCharReorder) {
        EXPECT_LE(d, 2u);
      } else {
        EXPECT_EQ(d, 1u) << w << " -> " << out;
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 2000);
}

TEST(CharPerturb, DeterministicForSeed) {
  for (auto kind : kAllCharPerturbKinds) {
    SplitMix64 a(5), b(5);
    EXPECT_EQ(perturb_chars("galloping", kind, a), perturb_chars("galloping", kind, b));
  }
}

TEST(Levenshtein, Examples) {
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(levenshtein("abc", "abc"), 0u);
  EXPECT_NEAR(formal_similarity("kitten", "sitting"), 1.0 - 3.0 / 7.0, 1e-12);
  EXPECT_NEAR(formal_similarity("kitten", "sitting"), 0.5714, 1e-4);
  EXPECT_DOUBLE_EQ(formal_similarity("", ""), 1.0);
  EXPECT_DOUBLE_EQ(formal_similarity("abc", "xyz"), 0.0);
}

TEST(Levenshtein, MatchesOracleOnRandomPairs) {
  SplitMix64 rng(2024);
  const std::string alphabet = "abcde ";
  auto rand_str = [&] {
    std::string s;
    const std::size_t n = rng.uniform(16);
    for (std::size_t i = 0; i < n; ++i) s += alphabet[rng.uniform(alphabet.size())];
    return s;
  };
  for (int i = 0; i < 1000; ++i) {
    const std::string a = rand_str(), b = rand_str(), c = rand_str();
    const std::size_t ab = levenshtein(a, b);
    ASSERT_EQ(ab, oracle_edit_distance(a, b)) << a << "|" << b;
    EXPECT_EQ(ab, levenshtein(b, a));
    EXPECT_EQ(ab == 0, a == b);
    EXPECT_LE(levenshtein(a, c), ab + levenshtein(b, c));
    const double f = formal_similarity(a, b);
    EXPECT_DOUBLE_EQ(f, oracle_formal(a, b));
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(FormalSimilarity, PromptOverloadUsesRawText) {
  const Prompt x = tokenize("a horse galloping");
  const Prompt y = tokenize("a  horse   galloping");
  EXPECT_DOUBLE_EQ(formal_similarity(x, y), 1.0);
}

}  // namespace
}  // namespace t2va
