// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: attacks, probes, budget math, curation, reports,
// POS analysis and a mock scorer server.
//
// Exit codes: 0 success, 1 error (diagnostic on stderr), 2 attack finished
// without meeting its success criterion. Stdout carries JSON lines only.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "t2va/analysis.hpp"
#include "t2va/attack.hpp"
#include "t2va/config.hpp"
#include "t2va/endpoint.hpp"
#include "t2va/lexicon.hpp"

namespace fs = std::filesystem;
using namespace t2va;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotMet = 2;

struct RunOptions {
  std::string config_file;
  std::vector<std::string> prompts;
  std::string prompts_file;
  std::optional<std::string> objective;
  std::optional<std::string> scorer;
  std::optional<double> theta;
  std::optional<double> tau;
  std::optional<std::size_t> max_edits;
  std::optional<std::string> schedule;
  std::optional<std::string> topk;
  std::optional<std::string> position;
  std::optional<std::size_t> char_queries;
  std::optional<double> eps_sem;
  std::optional<double> eps_form;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> victim_seed;
  std::optional<std::size_t> parallel;
  std::optional<int> retries;
  std::optional<int> backoff_ms;
  std::optional<std::string> out;
  std::optional<std::string> vocab;
  std::optional<std::string> wordlist;
  std::optional<std::string> synonyms;
  std::optional<std::string> stopwords;
  std::optional<std::string> pos;
  std::optional<std::string> embedder;
  std::optional<std::string> victim;
};

/// Fully resolved run configuration; echoed to <out>/config.json.
struct RunConfig {
  std::string mode;
  std::string scorer;
  std::string victim;
  AttackConfig attack;
  std::vector<std::string> prompts;
  std::string out = "t2va_out";
  std::size_t parallel = 1;
  int retries = 3;
  int backoff_ms = 50;
  std::string embedder = "builtin";
  Json lexicon = Json::object();
  // probe only
  std::string probe_op;
  std::string probe_at;

  Json to_json() const {
    Json j;
    j["mode"] = mode;
    j["scorer"] = scorer;
    j["victim"] = victim;
    j["attack"] = attack.to_json();
    j["lexicon"] = lexicon;
    j["embedder"] = embedder;
    j["parallel"] = parallel;
    j["retries"] = retries;
    j["backoff_ms"] = backoff_ms;
    j["out"] = out;
    if (!probe_op.empty()) {
      j["probe_op"] = probe_op;
      j["probe_at"] = probe_at;
    }
    j["prompts"] = prompts;
    return j;
  }
};

void add_run_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config_file, "JSON run config; flags override it");
  cmd->add_option("--prompt", o.prompts, "prompt text (repeatable)");
  cmd->add_option("--prompts-file", o.prompts_file, "one prompt per line");
  cmd->add_option("--objective", o.objective, "semantic|temporal");
  cmd->add_option("--scorer", o.scorer, "http://..., stdio:<command> or mock:<spec.json>");
  cmd->add_option("--theta", o.theta, "synonym similarity threshold");
  cmd->add_option("--tau", o.tau, "success ratio post/pre");
  cmd->add_option("--max-edits", o.max_edits, "word modification limit");
  cmd->add_option("--schedule", o.schedule, "q1[,q2,...][/k1,...]");
  cmd->add_option("--topk", o.topk, "k1[,k2,...] (alternative to /k in --schedule)");
  cmd->add_option("--position", o.position, "first|middle|last|random|important");
  cmd->add_option("--char-queries", o.char_queries, "character perturbation queries");
  cmd->add_option("--eps-sem", o.eps_sem, "semantic similarity floor");
  cmd->add_option("--eps-form", o.eps_form, "formal similarity floor");
  cmd->add_option("--seed", o.seed, "run RNG seed");
  cmd->add_option("--victim-seed", o.victim_seed, "generation seed sent to the scorer");
  cmd->add_option("--parallel", o.parallel, "scoring requests in flight");
  cmd->add_option("--retries", o.retries, "transport retries per request");
  cmd->add_option("--backoff-ms", o.backoff_ms, "initial retry backoff");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--vocab", o.vocab, "vocabulary file, one word per line");
  cmd->add_option("--wordlist", o.wordlist, "spell-check dictionary for --vocab");
  cmd->add_option("--synonyms", o.synonyms, "synonym TSV");
  cmd->add_option("--stopwords", o.stopwords, "stopword list");
  cmd->add_option("--pos", o.pos, "POS lexicon TSV");
  cmd->add_option("--embedder", o.embedder, "builtin|remote");
  cmd->add_option("--victim", o.victim, "victim label for reports");
}

std::vector<std::string> read_prompt_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) out.push_back(line);
  }
  return out;
}

RunConfig resolve(const std::string& mode, const RunOptions& o) {
  RunConfig rc;
  rc.mode = mode;
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    if (!in) throw Error(ErrorCode::kFileNotFound, o.config_file);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kInvalidConfig, "bad JSON in " + o.config_file);
    rc.scorer = j.value("scorer", rc.scorer);
    rc.victim = j.value("victim", rc.victim);
    if (j.contains("attack")) rc.attack.merge_json(j["attack"]);
    rc.prompts = j.value("prompts", rc.prompts);
    rc.out = j.value("out", rc.out);
    rc.parallel = j.value("parallel", rc.parallel);
    rc.retries = j.value("retries", rc.retries);
    rc.backoff_ms = j.value("backoff_ms", rc.backoff_ms);
    rc.embedder = j.value("embedder", rc.embedder);
    if (j.contains("lexicon")) rc.lexicon = j["lexicon"];
  }
  if (o.scorer) rc.scorer = *o.scorer;
  if (o.victim) rc.victim = *o.victim;
  if (o.out) rc.out = *o.out;
  if (o.parallel) rc.parallel = *o.parallel;
  if (o.retries) rc.retries = *o.retries;
  if (o.backoff_ms) rc.backoff_ms = *o.backoff_ms;
  if (o.embedder) rc.embedder = *o.embedder;
  auto set_lex = [&](const char* key, const std::optional<std::string>& v) {
    if (v) rc.lexicon[key] = *v;
  };
  set_lex("vocab", o.vocab);
  set_lex("wordlist", o.wordlist);
  set_lex("synonyms", o.synonyms);
  set_lex("stopwords", o.stopwords);
  set_lex("pos", o.pos);

  AttackConfig& a = rc.attack;
  if (o.objective) {
    auto obj = parse_objective(*o.objective);
    if (!obj) throw Error(ErrorCode::kInvalidConfig, "unknown objective " + *o.objective);
    a.objective = *obj;
  }
  if (o.theta) a.theta = *o.theta;
  if (o.tau) a.tau = *o.tau;
  if (o.max_edits) a.max_word_edits = *o.max_edits;
  if (o.schedule) {
    std::string text = *o.schedule;
    if (o.topk) {
      if (text.find('/') != std::string::npos) {
        throw Error(ErrorCode::kInvalidConfig, "give top-k either in --schedule or --topk");
      }
      text += "/" + *o.topk;
    }
    a.schedule = Schedule::parse(text);
  } else if (o.topk) {
    a.schedule = Schedule::parse(a.schedule.to_string().substr(
                                     0, a.schedule.to_string().find('/')) +
                                 "/" + *o.topk);
  }
  if (o.position) {
    auto p = parse_position(*o.position);
    if (!p) throw Error(ErrorCode::kInvalidConfig, "unknown position " + *o.position);
    a.position = *p;
  }
  if (o.char_queries) a.char_perturb_queries = *o.char_queries;
  if (o.eps_sem) a.eps_semantic = *o.eps_sem;
  if (o.eps_form) a.eps_formal = *o.eps_form;
  if (o.seed) a.seed = *o.seed;
  if (o.victim_seed) a.victim_seed = *o.victim_seed;
  a.validate();

  if (!o.prompts.empty()) rc.prompts = o.prompts;
  if (!o.prompts_file.empty()) {
    for (auto& p : read_prompt_lines(o.prompts_file)) rc.prompts.push_back(std::move(p));
  }
  if (rc.prompts.empty()) throw Error(ErrorCode::kInvalidConfig, "no prompts given");
  for (auto& p : rc.prompts) p = tokenize(p).raw();
  if (rc.scorer.empty()) throw Error(ErrorCode::kInvalidConfig, "--scorer is required");
  if (rc.embedder != "builtin" && rc.embedder != "remote") {
    throw Error(ErrorCode::kInvalidConfig, "--embedder must be builtin or remote");
  }
  if (rc.victim.empty()) rc.victim = rc.scorer;
  return rc;
}

std::string lex_path(const RunConfig& rc, const char* key) {
  return rc.lexicon.value(key, std::string{});
}

Vocabulary load_vocab(const RunConfig& rc) {
  const auto vocab = lex_path(rc, "vocab");
  if (vocab.empty()) throw Error(ErrorCode::kInvalidConfig, "--vocab is required");
  const auto wordlist = lex_path(rc, "wordlist");
  if (!wordlist.empty()) return load_vocabulary(vocab, wordlist);
  std::vector<std::string> words;
  for (auto& w : detail::read_lines(vocab))
    if (detail::all_letters(w)) words.push_back(std::move(w));
  if (words.empty()) throw Error(ErrorCode::kEmptyVocabulary, vocab);
  auto v = Vocabulary::from_words(words, vocab);
  v.original_size = detail::read_lines(vocab).size();
  return v;
}

Lexicon load_lexicon(const RunConfig& rc) {
  Lexicon lex;
  if (auto p = lex_path(rc, "synonyms"); !p.empty()) lex.synonyms = load_synonyms(p);
  if (auto p = lex_path(rc, "stopwords"); !p.empty()) lex.stopwords = load_stopwords(p);
  if (auto p = lex_path(rc, "pos"); !p.empty()) lex.pos = load_pos_lexicon(p);
  return lex;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

std::optional<EditKind> parse_edit_kind(const std::string& s) {
  for (auto k : {EditKind::kSubstitution, EditKind::kInsertion, EditKind::kDeletion,
                 EditKind::kReordering})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

int run_attacks(const RunConfig& rc) {
  ClientOptions copts;
  copts.parallel = rc.parallel;
  copts.max_retries = rc.retries;
  copts.backoff = std::chrono::milliseconds(rc.backoff_ms);
  ScorerClient client(make_transport(rc.scorer), copts);
  const HealthInfo health = client.health();
  if (health.status != "ok") {
    throw Error(ErrorCode::kTransport, "scorer reports status '" + health.status + "'");
  }

  std::optional<Vocabulary> vocab;
  std::optional<Lexicon> lexicon;
  if (rc.mode == "sub") {
    lexicon = load_lexicon(rc);
  } else {
    vocab = load_vocab(rc);
  }
  const Embedder embedder =
      rc.embedder == "remote" ? client.remote_embedder() : builtin_embedder();

  fs::create_directories(rc.out);
  write_text(fs::path(rc.out) / "config.json", rc.to_json().dump(2) + "\n");

  std::vector<AttackSummary> summaries;
  int exit_code = kExitOk;
  for (std::size_t i = 0; i < rc.prompts.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "p%04zu", i);
    const fs::path dir = fs::path(rc.out) / name;
    fs::create_directories(dir);
    const Prompt x = tokenize(rc.prompts[i]);
    Trace trace;
    Json line;
    line["prompt_index"] = i;
    try {
      AttackResult r;
      if (rc.mode == "sub") {
        r = attack_substitution(x, rc.attack, client, *lexicon, embedder, &trace);
      } else if (rc.mode == "ins") {
        r = attack_insertion(x, rc.attack, *vocab, client, embedder, &trace);
      } else if (rc.mode == "ins-plus") {
        r = attack_insertion_plus(x, rc.attack, *vocab, client, embedder, &trace);
      } else {
        const auto op = parse_edit_kind(rc.probe_op);
        if (!op) throw Error(ErrorCode::kInvalidConfig, "unknown --op " + rc.probe_op);
        const auto at = rc.probe_at == "important" ? ProbePosition::kImportant
                                                   : ProbePosition::kFirst;
        r = random_edit_probe(x, *op, at, rc.attack, *vocab, client, embedder, &trace);
      }
      Json result = r.to_json();
      result["victim"] = rc.victim;
      trace.set_result(result);
      trace.save((dir / "trace.jsonl").string());
      write_text(dir / "result.json", result.dump(2) + "\n");
      AttackSummary s = summarize(trace, embedder);
      write_text(dir / "report.md", render_report({s}, ReportFormat::kMarkdown));
      summaries.push_back(s);
      line["success"] = r.success;
      line["outcome"] = std::string(to_string(r.outcome));
      line["pre_score"] = r.pre_score;
      line["post_score"] = r.post_score;
      line["queries_used"] = r.queries_used;
      line["adversarial"] = r.adversarial.raw();
      if (!r.success && exit_code == kExitOk) exit_code = kExitNotMet;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kTransport || e.code() == ErrorCode::kMalformedResponse ||
          e.code() == ErrorCode::kNegativeScore || e.code() == ErrorCode::kInvalidConfig) {
        throw;
      }
      std::cerr << "prompt " << i << ": " << e.what() << "\n";
      Json err;
      err["error"] = e.what();
      write_text(dir / "result.json", err.dump(2) + "\n");
      trace.save((dir / "trace.jsonl").string());
      line["error"] = std::string(to_string(e.code()));
      exit_code = kExitError;
    }
    std::cout << line.dump() << "\n";
  }
  if (!summaries.empty()) {
    export_report(summaries, ReportFormat::kCsv, (fs::path(rc.out) / "summary.csv").string());
  }
  const auto ledger = client.ledger();
  std::cerr << "queries: " << ledger.unique_queries << " unique, " << ledger.cache_hits
            << " cache hits\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-budgeted prompt attacks against black-box text-to-video scorers"};
  app.require_subcommand(1);

  RunOptions attack_opts;
  std::string attack_mode;
  auto* attack = app.add_subcommand("attack", "run sub | ins | ins-plus attacks");
  attack->add_option("mode", attack_mode, "sub|ins|ins-plus")
      ->required()
      ->check(CLI::IsMember({"sub", "ins", "ins-plus"}));
  add_run_flags(attack, attack_opts);

  RunOptions probe_opts;
  std::string probe_op = "insertion", probe_at = "first";
  auto* probe = app.add_subcommand("probe", "single random edit baseline");
  probe->add_option("--op", probe_op, "substitution|insertion|deletion|reordering");
  probe->add_option("--at", probe_at, "first|important")
      ->check(CLI::IsMember({"first", "important"}));
  add_run_flags(probe, probe_opts);

  std::string budget_schedule;
  auto* budget = app.add_subcommand("budget", "print Q for a schedule");
  budget->add_option("schedule", budget_schedule, "q1[,q2,...][/k1,...]")->required();

  std::vector<std::string> curate_tables;
  std::size_t curate_k = 0;
  std::string curate_out;
  auto* curate = app.add_subcommand("curate", "consensus top-k prompt selection");
  curate->add_option("--table", curate_tables, "score TSV (prompt x model), repeatable")
      ->required();
  curate->add_option("-k", curate_k, "top-k per model")->required();
  curate->add_option("--out", curate_out, "directory for prompts.txt + provenance.json");

  std::vector<std::string> report_traces;
  std::string report_format = "csv", report_out, report_victim;
  auto* report = app.add_subcommand("report", "summarize traces into a table");
  report->add_option("--trace", report_traces, "trace.jsonl, repeatable")->required();
  report->add_option("--format", report_format, "csv|markdown")
      ->check(CLI::IsMember({"csv", "markdown"}));
  report->add_option("--out", report_out, "output file (default stdout)");
  report->add_option("--victim", report_victim, "victim label when traces lack one");

  std::vector<std::string> pos_traces;
  std::size_t pos_k = 0;
  std::string pos_lexicon, pos_vocab, pos_wordlist;
  auto* pos = app.add_subcommand("pos", "POS distribution of effective inserted words");
  pos->add_option("--trace", pos_traces, "insertion trace.jsonl, repeatable")->required();
  pos->add_option("-K", pos_k, "lowest-scoring words per trace")->required();
  pos->add_option("--pos", pos_lexicon, "POS lexicon TSV")->required();
  pos->add_option("--vocab", pos_vocab, "vocabulary file")->required();
  pos->add_option("--wordlist", pos_wordlist, "spell-check dictionary");

  std::string serve_spec, serve_http;
  auto* serve = app.add_subcommand("mock-serve", "serve the mock victim on stdio or HTTP");
  serve->add_option("--spec", serve_spec, "mock victim spec JSON")->required();
  serve->add_option("--http", serve_http, "host:port (default: stdio)");

  std::string health_scorer;
  auto* health = app.add_subcommand("health", "query a scorer's health endpoint");
  health->add_option("--scorer", health_scorer, "scorer URI")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, std::cerr, std::cerr) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*attack) return run_attacks(resolve(attack_mode, attack_opts));
    if (*probe) {
      RunConfig rc = resolve("probe", probe_opts);
      rc.probe_op = probe_op;
      rc.probe_at = probe_at;
      return run_attacks(rc);
    }
    if (*budget) {
      const Schedule s = Schedule::parse(budget_schedule);
      std::cout << s.budget() << "\n";
      return kExitOk;
    }
    if (*curate) {
      std::vector<CurationTable> tables;
      for (const auto& spec : curate_tables) tables.push_back(CurationTable::load_tsv(spec));
      const CurationResult res = curate_prompts(tables, curate_k);
      std::string listing;
      for (const auto& p : res.prompts) listing += p + "\n";
      if (!curate_out.empty()) {
        fs::create_directories(curate_out);
        write_text(fs::path(curate_out) / "prompts.txt", listing);
        write_text(fs::path(curate_out) / "provenance.json", res.provenance.dump(2) + "\n");
      }
      std::cout << listing;
      return kExitOk;
    }
    if (*report) {
      std::vector<AttackSummary> summaries;
      for (const auto& path : report_traces) {
        AttackSummary s = summarize(Trace::load(path));
        if (s.victim.empty()) s.victim = report_victim;
        summaries.push_back(std::move(s));
      }
      const auto text = render_report(
          summaries, report_format == "csv" ? ReportFormat::kCsv : ReportFormat::kMarkdown);
      if (report_out.empty()) {
        std::cout << text;
      } else {
        write_text(report_out, text);
      }
      return kExitOk;
    }
    if (*pos) {
      std::vector<Trace> traces;
      for (const auto& path : pos_traces) traces.push_back(Trace::load(path));
      RunConfig rc;
      rc.lexicon["vocab"] = pos_vocab;
      if (!pos_wordlist.empty()) rc.lexicon["wordlist"] = pos_wordlist;
      const PosReport rep =
          pos_distribution_diff(traces, pos_k, load_pos_lexicon(pos_lexicon), load_vocab(rc));
      std::cout << rep.to_json().dump() << "\n";
      return kExitOk;
    }
    if (*serve) {
      auto victim = std::make_shared<MockVictim>(MockVictimSpec::load(serve_spec));
      if (serve_http.empty()) {
        victim->serve_stdio(std::cin, std::cout);
        return kExitOk;
      }
      const auto colon = serve_http.rfind(':');
      if (colon == std::string::npos) {
        throw Error(ErrorCode::kInvalidConfig, "--http expects host:port");
      }
      httplib::Server server;
      mount_mock_routes(server, victim);
      std::cerr << "mock victim listening on " << serve_http << "\n";
      if (!server.listen(serve_http.substr(0, colon), std::stoi(serve_http.substr(colon + 1)))) {
        throw Error(ErrorCode::kTransport, "cannot listen on " + serve_http);
      }
      return kExitOk;
    }
    if (*health) {
      ScorerClient client(make_transport(health_scorer));
      std::cout << client.health().to_json().dump() << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
