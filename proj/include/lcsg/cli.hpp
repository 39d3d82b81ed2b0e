#pragma once

// Command-line front end. run_cli is in-process so tests can drive it
// directly; tools/lcsg.cpp only forwards argv.
//
// Exit codes: 0 success / member / equivalent, 1 negative result, 2 usage or
// input error, 3 fuel or budget exhausted.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lcsg/autoregressive.hpp"
#include "lcsg/csl_bridge.hpp"
#include "lcsg/derivation.hpp"
#include "lcsg/grammar_io.hpp"
#include "lcsg/grammar_predictor.hpp"
#include "lcsg/induction.hpp"
#include "lcsg/ngram.hpp"
#include "lcsg/stochastic.hpp"
#include "lcsg/toy_attention.hpp"
#include "lcsg/trace_io.hpp"

namespace lcsg {

enum ExitCode : int { exit_ok = 0, exit_negative = 1, exit_usage = 2, exit_exhausted = 3 };

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Grammar load_grammar(const std::string& path) { return parse_grammar(read_file(path)); }

/// One whitespace-tokenized sequence per line; blank lines are empty sequences.
inline std::vector<SymbolString> load_corpus(const std::string& path) {
  std::vector<SymbolString> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    SymbolString s;
    for (auto& w : split_whitespace(line)) s.push_back(terminal(w));
    out.push_back(std::move(s));
  }
  return out;
}

/// One symbol per line; line order is vocabulary index.
inline Vocabulary load_vocabulary(const std::string& path) {
  Vocabulary v;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    auto words = split_whitespace(line);
    if (words.empty()) continue;
    if (words.size() != 1) throw Error(ErrorCode::invalid_argument, "vocabulary line '" + line + "' has several symbols");
    if (v.find(terminal(words[0]))) throw Error(ErrorCode::duplicate_symbol, "'" + words[0] + "' listed twice");
    v.add(terminal(words[0]));
  }
  return v;
}

/// Reads a whitespace-tokenized string, resolving names against the grammar.
inline SymbolString grammar_string(const Grammar& g, std::string_view text) {
  SymbolString out;
  for (auto& w : split_whitespace(text)) {
    if (w == lambda_token) continue;
    if (g.declares(terminal(w))) out.push_back(terminal(w));
    else if (g.declares(nonterminal(w))) out.push_back(nonterminal(w));
    else throw Error(ErrorCode::undeclared_symbol, "'" + w + "' is not declared by the grammar");
  }
  return out;
}

struct PredictorOptions {
  std::string family = "grammar";
  std::string grammar_path, corpus_path, vocab_path, tokens;
  std::size_t k = 2;
  std::size_t embed_dim = ToyAttentionPredictor::default_embed_dim;
};

inline void add_predictor_options(CLI::App* cmd, PredictorOptions& o) {
  cmd->add_option("--predictor", o.family, "grammar | ngram | toy_attention")
      ->check(CLI::IsMember({"grammar", "ngram", "toy_attention"}))
      ->capture_default_str();
  cmd->add_option("-g,--grammar", o.grammar_path, "weighted grammar file (grammar predictor)");
  cmd->add_option("--corpus", o.corpus_path, "training corpus (ngram predictor)");
  cmd->add_option("-k,--order", o.k, "context order (ngram predictor)")->capture_default_str();
  cmd->add_option("--vocab", o.vocab_path, "vocabulary file, one symbol per line");
  cmd->add_option("--tokens", o.tokens, "vocabulary as a whitespace separated list");
  cmd->add_option("--embed-dim", o.embed_dim, "embedding width (toy_attention predictor)")->capture_default_str();
}

inline std::unique_ptr<Predictor> make_predictor(const PredictorOptions& o, std::optional<std::uint64_t> seed) {
  Vocabulary vocab;
  if (!o.vocab_path.empty()) vocab = load_vocabulary(o.vocab_path);
  else if (!o.tokens.empty())
    for (auto& w : split_whitespace(o.tokens)) vocab.add(terminal(w));

  if (o.family == "grammar") {
    if (o.grammar_path.empty()) throw Error(ErrorCode::invalid_argument, "--grammar is required for the grammar predictor");
    return std::make_unique<GrammarPredictor>(WeightedGrammar(load_grammar(o.grammar_path)));
  }
  if (o.family == "ngram") {
    if (o.corpus_path.empty()) throw Error(ErrorCode::invalid_argument, "--corpus is required for the ngram predictor");
    return std::make_unique<NgramPredictor>(ngram_train(load_corpus(o.corpus_path), o.k, std::move(vocab)));
  }
  if (vocab.empty()) throw Error(ErrorCode::invalid_argument, "--vocab or --tokens is required for toy_attention");
  if (!seed) throw Error(ErrorCode::invalid_argument, "--seed is required for toy_attention weights");
  return std::make_unique<ToyAttentionPredictor>(*seed, o.embed_dim, std::move(vocab));
}

inline int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::fuel_exhausted:
    case ErrorCode::state_budget_exceeded: return exit_exhausted;
    case ErrorCode::nonconforming_record: return exit_negative;
    default: return exit_usage;
  }
}

}  // namespace detail

/// Runs one command. `args` excludes the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Left context-sensitive grammar lab", "lcsg"};
  app.require_subcommand(1);
  app.allow_extras(false);

  std::string grammar_path, grammar2_path, word, form, output_path, record_path;
  std::size_t max_len = 6, fuel = default_fuel, max_steps = 1000, count = 1, max_t = 32, max_context = 8;
  std::size_t state_cap = default_state_budget;
  std::optional<std::size_t> window, production, position;
  std::optional<std::uint64_t> seed;
  std::string policy = "greedy", prompt;
  bool no_prune = false, skeleton = false;
  detail::PredictorOptions popt;

  auto* validate = app.add_subcommand("validate", "check a grammar file");
  validate->add_option("-g,--grammar", grammar_path, "grammar file")->required();

  auto* classify = app.add_subcommand("classify", "Chomsky-style class of a grammar and of each production");
  classify->add_option("-g,--grammar", grammar_path, "grammar file")->required();

  auto* derive = app.add_subcommand("derive", "one-step derivations of a sentential form");
  derive->add_option("-g,--grammar", grammar_path, "grammar file")->required();
  derive->add_option("--form", form, "sentential form (default: start symbol)");
  derive->add_option("--production", production, "apply only this production index");
  derive->add_option("--position", position, "apply only at this position");

  auto* enumerate = app.add_subcommand("enumerate", "all strings up to a length");
  enumerate->add_option("-g,--grammar", grammar_path, "grammar file")->required();
  enumerate->add_option("-n,--max-len", max_len, "length bound")->capture_default_str();
  enumerate->add_option("--fuel", fuel, "expansion budget")->capture_default_str();

  auto* member = app.add_subcommand("member", "bounded membership with a witness derivation");
  member->add_option("-g,--grammar", grammar_path, "grammar file")->required();
  member->add_option("-w,--word", word, "terminal string, whitespace separated ('_' for empty)")->required();
  member->add_option("--fuel", fuel, "expansion budget")->capture_default_str();
  member->add_flag("--no-prune", no_prune, "disable search pruning");

  auto* sample = app.add_subcommand("sample", "sample derivations from a weighted grammar");
  sample->add_option("-g,--grammar", grammar_path, "weighted grammar file")->required();
  sample->add_option("--seed", seed, "random seed")->required();
  sample->add_option("--max-steps", max_steps, "steps per derivation")->capture_default_str();
  sample->add_option("--count", count, "number of samples; above 1 prints string frequencies")->capture_default_str();

  auto* generate_cmd = app.add_subcommand("generate", "run autoregressive generation");
  detail::add_predictor_options(generate_cmd, popt);
  generate_cmd->add_option("--prompt", prompt, "prompt tokens");
  generate_cmd->add_option("--policy", policy, "greedy | sample")
      ->check(CLI::IsMember({"greedy", "sample"}))
      ->capture_default_str();
  generate_cmd->add_option("--seed", seed, "random seed")->required();
  generate_cmd->add_option("-T,--max-t", max_t, "maximum generated tokens")->capture_default_str();
  generate_cmd->add_option("--window", window, "sliding context window (records become nonconforming)");

  auto* extract = app.add_subcommand("extract", "left context-sensitive reading of a generation record");
  extract->add_option("-r,--record", record_path, "generation record file")->required()->check(CLI::ExistingFile);

  auto* induce = app.add_subcommand("induce", "explicit grammar of a finite-state predictor");
  detail::add_predictor_options(induce, popt);
  induce->add_option("--seed", seed, "random seed (toy_attention weights)");
  induce->add_option("--max-context", max_context, "exploration depth")->capture_default_str();
  induce->add_option("--state-cap", state_cap, "maximum distinct states")->capture_default_str();
  induce->add_flag("--skeleton", skeleton, "print the lambda-free equivalent instead");

  auto* equiv = app.add_subcommand("equiv", "bounded weak equivalence of two grammars");
  equiv->add_option("--g1", grammar_path, "first grammar file")->required();
  equiv->add_option("--g2", grammar2_path, "second grammar file")->required();
  equiv->add_option("-n,--max-len", max_len, "length bound")->capture_default_str();
  equiv->add_option("--fuel", fuel, "expansion budget")->capture_default_str();

  for (auto* cmd : app.get_subcommands({})) {
    cmd->add_option("-o,--output", output_path, "write the result to a file instead of stdout");
    cmd->allow_extras(false);
  }

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return exit_usage;
  }

  std::ostringstream buf;
  int code = exit_ok;
  try {
    if (validate->parsed()) {
      const Grammar g = detail::load_grammar(grammar_path);
      const auto report = validate_grammar(g);
      for (const auto& v : report.violations) buf << "violation: " << v << '\n';
      buf << (report.ok() ? "valid" : "invalid") << '\n';
      buf << "noncontracting: " << (report.noncontracting ? "yes" : "no") << '\n';
      code = report.ok() ? exit_ok : exit_negative;
    } else if (classify->parsed()) {
      const Grammar g = detail::load_grammar(grammar_path);
      buf << "grammar: " << to_string(classify_grammar(g)) << '\n';
      for (std::size_t i = 0; i < g.productions.size(); ++i) {
        const auto& p = g.productions[i];
        buf << i << ": " << to_string(p.lhs) << " -> " << to_string(p.rhs) << "  {"
            << (is_permitted_lambda(g, p) ? std::string("LAMBDA_START") : classify_production(p).to_string()) << "}\n";
      }
    } else if (derive->parsed()) {
      const Grammar g = detail::load_grammar(grammar_path);
      const SymbolString w = form.empty() ? SymbolString{g.start} : detail::grammar_string(g, form);
      if (production) {
        if (*production >= g.productions.size())
          throw Error(ErrorCode::out_of_range, "no production " + std::to_string(*production));
        if (!position) throw Error(ErrorCode::invalid_argument, "--production needs --position");
        buf << to_string(apply_step(w, g.productions[*production], *position)) << '\n';
      } else {
        std::size_t shown = 0;
        for (const auto& s : successors(w, g)) {
          if (position && s.position != *position) continue;
          buf << "production=" << s.production_index << " position=" << s.position << " -> " << to_string(s.after)
              << '\n';
          ++shown;
        }
        if (shown == 0) code = exit_negative;
      }
    } else if (enumerate->parsed()) {
      const Grammar g = detail::load_grammar(grammar_path);
      const auto lang = enumerate_language(g, max_len, fuel);
      for (const auto& w : lang) buf << to_string(w) << '\n';
      buf << "# " << lang.size() << " strings of length <= " << max_len << '\n';
    } else if (member->parsed()) {
      const Grammar g = detail::load_grammar(grammar_path);
      const auto result = derives_bounded(g, terminal_string(word), {fuel, !no_prune, std::nullopt});
      buf << to_string(result.status) << " expanded=" << result.expanded << '\n';
      if (result.trace) buf << serialize_trace(*result.trace);
      code = result.status == SearchStatus::found       ? exit_ok
             : result.status == SearchStatus::not_found ? exit_negative
                                                        : exit_exhausted;
    } else if (sample->parsed()) {
      const WeightedGrammar wg(detail::load_grammar(grammar_path));
      DerivationSampler sampler(wg);
      if (count <= 1) {
        const auto r = sampler.sample(*seed, max_steps);
        buf << serialize_trace(r.trace);
        if (r.truncated) {
          buf << "truncated after " << max_steps << " steps\n";
          code = exit_exhausted;
        }
      } else {
        std::map<SymbolString, std::size_t, ShortlexLess> freq;
        std::size_t truncated = 0, dead_ends = 0;
        for (std::size_t i = 0; i < count; ++i) {
          try {
            const auto r = sampler.sample(*seed + i, max_steps);
            if (r.truncated) ++truncated;
            else ++freq[r.trace.result()];
          } catch (const Error& e) {
            if (e.code() != ErrorCode::dead_end) throw;
            ++dead_ends;
          }
        }
        for (const auto& [w, c] : freq) buf << c << '\t' << to_string(w) << '\n';
        buf << "# " << count << " samples, " << truncated << " truncated, " << dead_ends << " dead ends\n";
      }
    } else if (generate_cmd->parsed()) {
      const auto predictor = detail::make_predictor(popt, seed);
      SymbolString p;
      for (auto& w : split_whitespace(prompt))
        if (w != lambda_token) p.push_back(terminal(w));
      GenerationOptions options{*decoding_policy_from_string(policy), *seed, max_t, window};
      buf << serialize_trace(generate(*predictor, p, options));
    } else if (extract->parsed()) {
      const auto rec = parse_generation_record(detail::read_file(record_path));
      const auto report = make_trace_report(rec);
      buf << serialize_trace(report);
      code = report.conforming ? exit_ok : exit_negative;
    } else if (induce->parsed()) {
      const auto predictor = detail::make_predictor(popt, seed);
      const auto induced = induce_grammar(*predictor, max_context, state_cap);
      buf << "# states: " << induced.state_table.size() << (induced.truncated ? " (truncated at depth bound)" : "")
          << '\n';
      for (const auto& [name, enc] : induced.state_table) buf << "# " << name << " = " << enc << '\n';
      buf << render_grammar(skeleton ? eliminate_lambda(induced.grammar).grammar() : induced.grammar.grammar());
    } else if (equiv->parsed()) {
      const Grammar g1 = detail::load_grammar(grammar_path);
      const Grammar g2 = detail::load_grammar(grammar2_path);
      const auto r = check_weak_equivalence(g1, g2, max_len, fuel);
      if (r.equivalent) {
        buf << "equivalent up to length " << max_len << '\n';
      } else {
        buf << "counterexample: " << to_string(*r.counterexample) << " (only in g" << r.generated_by << ")\n";
        code = exit_negative;
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return detail::exit_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  if (output_path.empty()) {
    out << buf.str();
  } else {
    std::ofstream file(output_path, std::ios::binary);
    if (!file) {
      err << "error: cannot write '" << output_path << "'\n";
      return exit_usage;
    }
    file << buf.str();
  }
  return code;
}

}  // namespace lcsg
