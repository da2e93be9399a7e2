// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures and independent reference implementations for the unit
// and acceptance suites. Nothing here calls into the attack engines.

#pragma once

#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "t2va/config.hpp"
#include "t2va/lexicon.hpp"
#include "t2va/mock_victim.hpp"
#include "t2va/prompt.hpp"
#include "t2va/random.hpp"
#include "t2va/scorer.hpp"
#include "t2va/textsim.hpp"

namespace t2va::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("t2va_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    const auto p = file(name);
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  fs::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

/// Runs a shell command, capturing stdout. Stderr is discarded.
inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = ::popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string data_file(const std::string& name) {
  return std::string(T2VA_DATA_DIR) + "/" + name;
}

inline std::string cli_path() { return T2VA_CLI_PATH; }

/// A localhost TCP port with nothing listening on it.
inline int closed_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

/// Mock victim wired to a client over the in-process transport.
struct MockRig {
  std::shared_ptr<MockVictim> victim;
  std::unique_ptr<ScorerClient> client;

  explicit MockRig(MockVictimSpec spec, ClientOptions options = {}) {
    victim = std::make_shared<MockVictim>(std::move(spec));
    client = std::make_unique<ScorerClient>(
        std::make_shared<InProcessTransport>(victim), options);
  }
};

inline MockVictimSpec motion_spec(std::map<std::string, double> weights) {
  MockVictimSpec s;
  s.motion_weights = std::move(weights);
  return s;
}

// ---------------------------------------------------------------------------
// Oracles

/// Edit distance by memoized recursion over suffixes; deliberately not the
/// two-row table used by the library.
inline std::size_t oracle_edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
  std::function<long(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) -> long {
    if (i == a.size()) return static_cast<long>(b.size() - j);
    if (j == b.size()) return static_cast<long>(a.size() - i);
    long& m = memo[i][j];
    if (m >= 0) return m;
    if (a[i] == b[j]) return m = d(i + 1, j + 1);
    return m = 1 + std::min({d(i + 1, j), d(i, j + 1), d(i + 1, j + 1)});
  };
  return static_cast<std::size_t>(d(0, 0));
}

inline double oracle_formal(const std::string& a, const std::string& b) {
  const std::size_t m = std::max(a.size(), b.size());
  if (m == 0) return 1.0;
  return 1.0 - static_cast<double>(oracle_edit_distance(a, b)) / static_cast<double>(m);
}

/// FNV-1a 64 written from the published constants.
inline std::uint64_t oracle_fnv(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::size_t oracle_bucket(const std::string& word) { return oracle_fnv(word) % 256; }

/// Random lowercase word of 3..8 letters.
inline std::string random_word(SplitMix64& rng) {
  static const char* kSyllables[] = {"ka", "lo", "mi", "ne", "ru", "ta", "vi", "so",
                                     "pe", "du", "ga", "ri", "zo", "ba", "fe", "hu"};
  std::string w;
  const std::size_t parts = 2 + rng.uniform(3);
  for (std::size_t i = 0; i < parts; ++i) w += kSyllables[rng.uniform(16)];
  return w;
}

/// `n` distinct random words.
inline std::vector<std::string> random_words(SplitMix64& rng, std::size_t n) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < n) {
    auto w = random_word(rng);
    if (seen.insert(w).second) out.push_back(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Straight-line substitution reference

struct RefSynonym {
  std::string word;
  double similarity;
};

struct RefSubstitutionFixture {
  std::vector<std::string> prompt;
  MockVictimSpec victim;
  Objective objective = Objective::kTemporal;
  std::map<std::string, std::vector<RefSynonym>> synonyms;
  std::set<std::string> stopwords;
  std::map<std::string, std::vector<std::string>> tags;
  double theta = 0.8;
  double tau = 0.1;
  std::size_t max_edits = 3;
  double eps_semantic = 0;
  double eps_formal = 0;
};

struct RefSubstitutionResult {
  std::vector<std::string> final_tokens;
  std::vector<std::pair<std::size_t, std::string>> edits;
  double pre = 0;
  double post = 0;
  bool success = false;
  std::size_t distinct_queries = 0;
};

inline std::string ref_join(const std::vector<std::string>& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? " " : "") + t[i];
  return s;
}

inline RefSubstitutionResult ref_substitution(const RefSubstitutionFixture& f) {
  const std::string original = ref_join(f.prompt);
  std::set<std::string> asked;
  auto score = [&](const std::vector<std::string>& t) {
    asked.insert(ref_join(t));
    double sum = 0;
    if (f.objective == Objective::kTemporal) {
      for (const auto& w : t) {
        auto it = f.victim.motion_weights.find(detail::lowercase(w));
        if (it != f.victim.motion_weights.end()) sum += it->second;
      }
      return std::max(0.0, sum);
    }
    return mock_semantic_score(f.victim, original, ref_join(t));
  };
  auto sem = [&](const std::vector<std::string>& t) {
    return cosine(embed_text(original), embed_text(ref_join(t)));
  };
  auto share_tag = [&](const std::string& a, const std::string& b) {
    const auto& ta = f.tags.at(a);
    const auto& tb = f.tags.at(b);
    for (const auto& x : ta)
      for (const auto& y : tb)
        if (x == y) return true;
    return false;
  };

  RefSubstitutionResult r;
  r.pre = score(f.prompt);
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < f.prompt.size(); ++i) {
    auto without = f.prompt;
    without.erase(without.begin() + static_cast<long>(i));
    order.push_back({-(r.pre - score(without)), i});
  }
  std::sort(order.begin(), order.end());

  auto cur = f.prompt;
  double cur_score = r.pre;
  for (const auto& [neg_imp, i] : order) {
    if (r.edits.size() >= f.max_edits) break;
    const std::string head = detail::lowercase(f.prompt[i]);
    auto it = f.synonyms.find(head);
    if (it == f.synonyms.end()) continue;
    std::vector<std::vector<std::string>> prompts;
    std::vector<std::string> words;
    for (const auto& c : it->second) {
      if (f.stopwords.count(c.word)) continue;
      if (!(c.similarity > f.theta)) continue;
      if (!share_tag(head, c.word)) continue;
      auto p = cur;
      p[i] = c.word;
      if (!(oracle_formal(original, ref_join(p)) > f.eps_formal)) continue;
      if (!(sem(p) > f.eps_semantic)) continue;
      prompts.push_back(p);
      words.push_back(c.word);
    }
    if (prompts.empty()) continue;
    std::vector<double> scores;
    for (const auto& p : prompts) scores.push_back(score(p));
    long hit = -1;
    double hit_sim = 0;
    for (std::size_t c = 0; c < prompts.size(); ++c) {
      if (scores[c] <= f.tau * r.pre) {
        const double s = sem(prompts[c]);
        if (hit < 0 || s > hit_sim) {
          hit = static_cast<long>(c);
          hit_sim = s;
        }
      }
    }
    if (hit >= 0) {
      cur = prompts[hit];
      cur_score = scores[hit];
      r.edits.push_back({i, words[hit]});
      break;
    }
    std::size_t m = 0;
    for (std::size_t c = 1; c < scores.size(); ++c)
      if (scores[c] < scores[m]) m = c;
    if (scores[m] < cur_score) {
      cur = prompts[m];
      cur_score = scores[m];
      r.edits.push_back({i, words[m]});
    }
  }
  r.final_tokens = cur;
  r.post = cur_score;
  r.success = r.post <= f.tau * r.pre;
  r.distinct_queries = asked.size();
  return r;
}

/// Builds the library lexicon equivalent of a reference fixture.
inline Lexicon lexicon_from(const RefSubstitutionFixture& f) {
  Lexicon lex;
  for (const auto& [head, list] : f.synonyms)
    for (const auto& c : list) lex.synonyms.add(head, {c.word, "synonym", c.similarity});
  for (const auto& s : f.stopwords) lex.stopwords.insert(s);
  for (const auto& [w, tags] : f.tags) {
    std::vector<PosTag> parsed;
    for (const auto& t : tags) parsed.push_back(*parse_pos_tag(t));
    lex.pos.add(w, parsed);
  }
  return lex;
}

/// Random fixture: prompt of 2..8 words, up to 4 synonyms per word.
inline RefSubstitutionFixture random_substitution_fixture(SplitMix64& rng) {
  static const char* kTags[] = {"NOUN", "VERB", "ADJ", "ADV"};
  RefSubstitutionFixture f;
  const auto pool = random_words(rng, 40);
  const std::size_t n = 2 + rng.uniform(7);
  for (std::size_t i = 0; i < n; ++i) f.prompt.push_back(pool[rng.uniform(12)]);
  for (const auto& w : pool) {
    f.tags[w] = {kTags[rng.uniform(4)]};
    if (rng.uniform(4) == 0) f.tags[w].push_back(kTags[rng.uniform(4)]);
    if (rng.uniform(3) != 0) {
      f.victim.motion_weights[w] = static_cast<double>(rng.uniform(31)) - 10.0;
    }
  }
  for (std::size_t i = 0; i < 12; ++i) {
    const std::size_t m = rng.uniform(5);
    std::set<std::string> used{pool[i]};
    for (std::size_t c = 0; c < m; ++c) {
      const auto& w = pool[12 + rng.uniform(28)];
      if (!used.insert(w).second) continue;
      f.synonyms[pool[i]].push_back({w, 0.5 + 0.5 * rng.unit()});
    }
  }
  if (rng.uniform(2)) f.stopwords.insert(pool[12 + rng.uniform(28)]);
  f.objective = rng.uniform(2) ? Objective::kTemporal : Objective::kSemantic;
  const double taus[] = {0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  f.tau = taus[rng.uniform(6)];
  f.theta = 0.5 + 0.1 * static_cast<double>(rng.uniform(4));
  f.max_edits = 1 + rng.uniform(3);
  const double eps[] = {0.0, 0.2, 0.4};
  f.eps_semantic = eps[rng.uniform(3)];
  f.eps_formal = eps[rng.uniform(3)];
  return f;
}

/// Three-word motion fixture: galloping -> trotting, fast -> quick.
inline RefSubstitutionFixture motion_substitution_fixture() {
  RefSubstitutionFixture f;
  f.prompt = {"horse", "galloping", "fast"};
  f.victim.motion_weights = {{"galloping", 12}, {"trotting", 0.5}, {"fast", 3}};
  f.objective = Objective::kTemporal;
  f.synonyms["galloping"] = {{"trotting", 0.9}};
  f.synonyms["fast"] = {{"quick", 0.9}};
  f.tags = {{"horse", {"NOUN"}},
            {"galloping", {"VERB"}},
            {"trotting", {"VERB"}},
            {"fast", {"ADJ", "ADV"}},
            {"quick", {"ADJ"}}};
  f.tau = 0.10;
  f.theta = 0.80;
  return f;
}

inline AttackConfig config_from(const RefSubstitutionFixture& f) {
  AttackConfig c;
  c.objective = f.objective;
  c.theta = f.theta;
  c.tau = f.tau;
  c.max_word_edits = f.max_edits;
  c.eps_semantic = f.eps_semantic;
  c.eps_formal = f.eps_formal;
  return c;
}

}  // namespace t2va::testing
