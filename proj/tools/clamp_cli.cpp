// Command-line front end. Talks to the library only through clamp.h.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clamp/clamp.h"

using nlohmann::json;

namespace {

constexpr int kUsage = 1;
constexpr int kDataError = 2;

bool g_json_errors = false;

// Carries a status out of the subcommand handlers.
struct Failure {
  clamp_status status;
  std::string message;
};

int exit_code(clamp_status st) { return st == CLAMP_ERR_INVALID_ARGUMENT ? kUsage : kDataError; }

void report(const std::string& kind, const std::string& message) {
  if (g_json_errors)
    std::cerr << json{{"error", message}, {"kind", kind}}.dump() << "\n";
  else
    std::cerr << "clamp: " << message << "\n";
}

void check(clamp_status st) {
  if (st != CLAMP_OK) throw Failure{st, clamp_last_error()};
}

// Owning wrappers for the C handles.
struct GrammarDeleter {
  void operator()(clamp_grammar* g) const { clamp_grammar_free(g); }
};
struct StateDeleter {
  void operator()(clamp_state* s) const { clamp_state_free(s); }
};
struct VocabDeleter {
  void operator()(clamp_vocab* v) const { clamp_vocab_free(v); }
};
struct StringDeleter {
  void operator()(char* s) const { clamp_string_free(s); }
};
using GrammarPtr = std::unique_ptr<clamp_grammar, GrammarDeleter>;
using StatePtr = std::unique_ptr<clamp_state, StateDeleter>;
using VocabPtr = std::unique_ptr<clamp_vocab, VocabDeleter>;

std::string take(char* s) {
  std::unique_ptr<char, StringDeleter> owned(s);
  return s ? std::string(s) : std::string();
}

GrammarPtr load_grammar(const std::string& path) {
  clamp_grammar* g = nullptr;
  check(clamp_grammar_load(path.c_str(), &g));
  return GrammarPtr(g);
}

VocabPtr load_vocab(const std::string& path) {
  clamp_vocab* v = nullptr;
  check(clamp_vocab_load(path.c_str(), &v));
  return VocabPtr(v);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{CLAMP_ERR_IO, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Failure{CLAMP_ERR_IO, "cannot write " + out_path};
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

// Advances from the initial state; returns null with *rejected set on failure.
StatePtr advance(const GrammarPtr& g, const std::string& text, size_t* rejected) {
  clamp_state* init = nullptr;
  check(clamp_state_new(g.get(), &init));
  StatePtr start(init);
  clamp_state* next = nullptr;
  clamp_status st = clamp_state_advance(start.get(), text.data(), text.size(), &next, rejected);
  if (st == CLAMP_ERR_REJECTED) return nullptr;
  check(st);
  return StatePtr(next);
}

std::string char_label(unsigned c) {
  if (c >= 0x20 && c < 0x7f) return std::string(1, static_cast<char>(c));
  char buf[8];
  std::snprintf(buf, sizeof buf, "\\x%02X", c);
  return buf;
}

// Config values for options the user did not pass on the command line. Keys
// at the top level apply to every subcommand that has such an option; keys
// under a subcommand name apply only there.
void apply_config(const json& cfg, CLI::App& sub) {
  auto apply = [&](const std::string& key, const json& value, bool strict) {
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      if (strict) throw CLI::ValidationError("--config", "unknown option '" + key + "' for " + sub.get_name());
      return;
    }
    if (opt->count() > 0) return;  // flags win
    std::vector<json> values = value.is_array() ? value.get<std::vector<json>>() : std::vector<json>{value};
    for (const auto& v : values) opt->add_result(v.is_string() ? v.get<std::string>() : v.dump());
    opt->run_callback();
  };
  for (const auto& [key, value] : cfg.items())
    if (!value.is_object()) apply(key, value, false);
  if (cfg.contains(sub.get_name()) && cfg.at(sub.get_name()).is_object())
    for (const auto& [key, value] : cfg.at(sub.get_name()).items()) apply(key, value, true);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grammar-constrained decoding toolkit"};
  app.set_version_flag("--version", std::string(clamp_version()));
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file of option defaults; explicit flags win")->check(CLI::ExistingFile);
  app.add_flag("--json", g_json_errors, "Machine-readable output: errors as {\"error\": ...} on stderr, reports as JSON");

  // Required options are checked after --config has been merged in, so a
  // config file can supply them.
  std::vector<std::pair<CLI::App*, CLI::Option*>> required;
  CLI::App* current = nullptr;
  auto must = [&](CLI::Option* o) { required.emplace_back(current, o); };

  std::string out_path;
  auto add_out = [&](CLI::App* s) { s->add_option("--out", out_path, "Write the result here instead of stdout"); };

  // induce-grammar
  auto* induce = app.add_subcommand("induce-grammar", "Induce a grammar from training programs");
  current = induce;
  std::string format = "lispress", dataset, split = "train", signatures, root_type, programs_file;
  induce->add_option("--format", format, "lispress or mtop")->check(CLI::IsMember({"lispress", "mtop"}));
  induce->add_option("--dataset", dataset, "Dataset whose gold programs are used");
  induce->add_option("--split", split, "Source split to read from the dataset ('' for all)");
  induce->add_option("--programs", programs_file, "Text file with one program per line (instead of --dataset)");
  induce->add_option("--signatures", signatures, "Signature table (lispress)");
  induce->add_option("--root-type", root_type, "Designated root type (lispress)");
  add_out(induce);

  // specialize-sql
  auto* specialize = app.add_subcommand("specialize-sql", "Restrict an SQL grammar to one schema");
  current = specialize;
  std::string grammar_path, schema_path;
  must(specialize->add_option("--grammar", grammar_path, "Base SQL grammar"));
  must(specialize->add_option("--schema", schema_path, "Schema JSON"));
  add_out(specialize);

  // check
  auto* check_cmd = app.add_subcommand("check", "Test whether a string is in the grammar's language");
  current = check_cmd;
  std::string input, input_file;
  must(check_cmd->add_option("--grammar", grammar_path, "Grammar file"));
  auto* input_opt = check_cmd->add_option("--input", input, "String to check");
  check_cmd->add_option("--input-file", input_file, "Read the string from a file")->excludes(input_opt);

  // allowed-chars
  auto* chars_cmd = app.add_subcommand("allowed-chars", "Bytes that may follow a prefix");
  current = chars_cmd;
  std::string prefix;
  must(chars_cmd->add_option("--grammar", grammar_path, "Grammar file"));
  chars_cmd->add_option("--prefix", prefix, "Consumed prefix");

  // allowed-tokens
  auto* tokens_cmd = app.add_subcommand("allowed-tokens", "Vocabulary ids that may follow a prefix");
  current = tokens_cmd;
  std::string vocab_path;
  must(tokens_cmd->add_option("--grammar", grammar_path, "Grammar file"));
  must(tokens_cmd->add_option("--vocab", vocab_path, "Vocabulary JSONL"));
  tokens_cmd->add_option("--prefix", prefix, "Consumed prefix");

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "Beam search against a scorer");
  current = decode_cmd;
  std::string scorer_spec = R"({"kind": "uniform"})", conditioning, length = "none";
  std::size_t beam = 5, max_tokens = 256;
  bool constrained = true;
  must(decode_cmd->add_option("--grammar", grammar_path, "Grammar file"));
  must(decode_cmd->add_option("--vocab", vocab_path, "Vocabulary JSONL"));
  decode_cmd->add_option("--scorer", scorer_spec, "Scorer spec: inline JSON or a path to a JSON file");
  decode_cmd->add_option("--conditioning", conditioning, "Conditioning string passed to the scorer");
  decode_cmd->add_option("--beam", beam, "Beam size")->check(CLI::PositiveNumber);
  decode_cmd->add_option("--max-tokens", max_tokens, "Maximum tokens per hypothesis")->check(CLI::PositiveNumber);
  decode_cmd->add_flag("--constrained,!--unconstrained", constrained, "Restrict tokens to the grammar (default on)");
  decode_cmd->add_option("--length", length, "none or normalize")->check(CLI::IsMember({"none", "normalize"}));
  add_out(decode_cmd);

  // make-splits
  auto* splits_cmd = app.add_subcommand("make-splits", "Sample low/medium/high resource splits");
  current = splits_cmd;
  std::uint64_t seed = 0;
  bool no_public_test = false;
  must(splits_cmd->add_option("--dataset", dataset, "Dataset JSONL"));
  splits_cmd->add_option("--seed", seed, "Sampling seed");
  splits_cmd->add_flag("--no-public-test", no_public_test, "Use dev as test and carve dev out of train");
  add_out(splits_cmd);

  // build-prompt
  auto* prompt_cmd = app.add_subcommand("build-prompt", "Few-shot prompt with BM25-retrieved examples");
  current = prompt_cmd;
  std::string query_id, utterance, query_dataset, context_mode = "none", order = "best_last";
  std::size_t budget = 1500, max_examples = 20;
  bool emit_json = false;
  must(prompt_cmd->add_option("--dataset", dataset, "Retrieval pool (training examples)"));
  auto* qid = prompt_cmd->add_option("--query-id", query_id, "Id of the example to build a prompt for");
  prompt_cmd->add_option("--utterance", utterance, "Rendered input to build a prompt for")->excludes(qid);
  prompt_cmd->add_option("--query-dataset", query_dataset, "Dataset holding --query-id (default: the pool)");
  prompt_cmd->add_option("--context-mode", context_mode, "none, last_agent, last_user_and_agent, sql_none, ...");
  prompt_cmd->add_option("--order", order, "random, best_first or best_last")
      ->check(CLI::IsMember({"random", "best_first", "best_last"}));
  prompt_cmd->add_option("--budget", budget, "Prompt budget in whitespace tokens");
  prompt_cmd->add_option("--max-examples", max_examples, "Example cap");
  prompt_cmd->add_option("--seed", seed, "Seed for random order");
  prompt_cmd->add_flag("--emit-json", emit_json, "Print {\"prompt\", \"n_examples\"} instead of raw text");
  add_out(prompt_cmd);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against gold programs");
  current = eval_cmd;
  std::string predictions, metric = "exact";
  must(eval_cmd->add_option("--predictions", predictions, "Predictions JSONL"));
  must(eval_cmd->add_option("--dataset", dataset, "Gold dataset JSONL"));
  eval_cmd->add_option("--metric", metric, "exact or lispress");
  add_out(eval_cmd);

  try {
    app.parse(argc, argv);
    if (!config_path.empty()) {
      json cfg;
      try {
        cfg = json::parse(read_text(config_path));
      } catch (const json::exception& e) {
        throw CLI::ValidationError("--config", e.what());
      }
      if (!cfg.is_object()) throw CLI::ValidationError("--config", "config must be a JSON object");
      for (auto* sub : app.get_subcommands()) apply_config(cfg, *sub);
    }
    for (auto [sub, opt] : required)
      if (sub->parsed() && opt->count() == 0) throw CLI::RequiredError(opt->get_name());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    if (g_json_errors) {
      report("usage", e.what());
      return kUsage;
    }
    app.exit(e);
    return kUsage;
  }

  try {
    if (induce->parsed()) {
      std::string programs;
      if (!programs_file.empty()) {
        json arr = json::array();
        std::istringstream lines(read_text(programs_file));
        for (std::string line; std::getline(lines, line);)
          if (line.find_first_not_of(" \t\r") != std::string::npos) arr.push_back(line);
        programs = arr.dump();
      } else if (!dataset.empty()) {
        programs = take([&] {
          char* s = nullptr;
          check(clamp_dataset_golds(dataset.c_str(), split.c_str(), &s));
          return s;
        }());
      } else {
        throw Failure{CLAMP_ERR_INVALID_ARGUMENT, "induce-grammar needs --dataset or --programs"};
      }
      clamp_grammar* g = nullptr;
      check(clamp_induce_grammar(format.c_str(), programs.c_str(), signatures.c_str(), root_type.c_str(), &g));
      GrammarPtr owned(g);
      char* text = nullptr;
      check(clamp_grammar_serialize(g, &text));
      emit(out_path, take(text));
    } else if (specialize->parsed()) {
      auto base = load_grammar(grammar_path);
      std::string schema = read_text(schema_path);
      clamp_grammar* g = nullptr;
      check(clamp_specialize_sql(base.get(), schema.c_str(), &g));
      GrammarPtr owned(g);
      char* text = nullptr;
      check(clamp_grammar_serialize(g, &text));
      emit(out_path, take(text));
    } else if (check_cmd->parsed()) {
      auto g = load_grammar(grammar_path);
      std::string text = input_file.empty() ? input : read_text(input_file);
      size_t rejected = 0;
      auto s = advance(g, text, &rejected);
      if (!s) {
        std::cout << "rejected at offset " << rejected << "\n";
        return kDataError;
      }
      if (!clamp_state_is_complete(s.get())) {
        std::cout << "rejected at offset " << text.size() << " (input ends inside a viable prefix)\n";
        return kDataError;
      }
      std::cout << "accepted\n";
    } else if (chars_cmd->parsed()) {
      auto g = load_grammar(grammar_path);
      size_t rejected = 0;
      auto s = advance(g, prefix, &rejected);
      if (!s) throw Failure{CLAMP_ERR_REJECTED, "prefix rejected at offset " + std::to_string(rejected)};
      uint8_t allowed[256];
      clamp_state_allowed_chars(s.get(), allowed);
      json chars = json::array();
      for (unsigned c = 0; c < 256; ++c)
        if (allowed[c]) chars.push_back(char_label(c));
      std::cout << json{{"allowed", chars}, {"complete", clamp_state_is_complete(s.get()) != 0}}.dump() << "\n";
    } else if (tokens_cmd->parsed()) {
      auto g = load_grammar(grammar_path);
      auto v = load_vocab(vocab_path);
      size_t rejected = 0;
      auto s = advance(g, prefix, &rejected);
      if (!s) throw Failure{CLAMP_ERR_REJECTED, "prefix rejected at offset " + std::to_string(rejected)};
      size_t count = 0;
      check(clamp_allowed_tokens(s.get(), v.get(), nullptr, 0, &count));
      std::vector<int32_t> ids(count);
      check(clamp_allowed_tokens(s.get(), v.get(), ids.data(), ids.size(), &count));
      std::cout << json{{"ids", ids}, {"eos", clamp_vocab_eos(v.get())},
                        {"complete", clamp_state_is_complete(s.get()) != 0}}.dump()
                << "\n";
    } else if (decode_cmd->parsed()) {
      auto g = load_grammar(grammar_path);
      auto v = load_vocab(vocab_path);
      std::string spec = scorer_spec;
      if (!spec.empty() && spec.front() != '{') spec = read_text(spec);
      json cfg{{"beam", beam}, {"max_tokens", max_tokens}, {"constrained", constrained}, {"length", length}};
      char* results = nullptr;
      check(clamp_decode(g.get(), v.get(), spec.c_str(), cfg.dump().c_str(), conditioning.c_str(), &results));
      emit(out_path, json::parse(take(results)).dump(2));
    } else if (splits_cmd->parsed()) {
      char* manifest = nullptr;
      check(clamp_make_splits(dataset.c_str(), no_public_test ? 0 : 1, seed, &manifest));
      emit(out_path, take(manifest));
    } else if (prompt_cmd->parsed()) {
      json req{{"pool", dataset},   {"context_mode", context_mode}, {"order", order},
               {"budget", budget},  {"max_examples", max_examples}, {"seed", seed}};
      if (!query_id.empty()) {
        req["query"] = {{"id", query_id}};
        if (!query_dataset.empty()) req["query_dataset"] = query_dataset;
      } else if (!utterance.empty()) {
        req["query"] = {{"utterance", utterance}};
      } else {
        throw Failure{CLAMP_ERR_INVALID_ARGUMENT, "build-prompt needs --query-id or --utterance"};
      }
      char* out = nullptr;
      check(clamp_build_prompt(req.dump().c_str(), &out));
      json result = json::parse(take(out));
      if (emit_json)
        emit(out_path, json{{"prompt", result["prompt"]}, {"n_examples", result["n_examples"]}}.dump());
      else
        emit(out_path, result["prompt"].get<std::string>());
    } else if (eval_cmd->parsed()) {
      char* report_text = nullptr;
      check(clamp_evaluate(predictions.c_str(), dataset.c_str(), metric.c_str(), &report_text));
      json r = json::parse(take(report_text));
      if (g_json_errors || !out_path.empty()) {
        emit(out_path, r.dump(2));
      } else {
        std::cout << "accuracy " << r["accuracy"].get<double>() << " (" << r["correct"].get<std::size_t>() << "/"
                  << r["total"].get<std::size_t>() << ")";
        if (metric == "lispress") std::cout << ", parse failures " << r["parse_failures"].get<std::size_t>();
        std::cout << "\n";
      }
    }
  } catch (const Failure& f) {
    report(clamp_status_name(f.status), f.message);
    return exit_code(f.status);
  } catch (const json::exception& e) {
    report("data", e.what());
    return kDataError;
  }
  return 0;
}
