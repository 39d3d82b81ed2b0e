#pragma once

// Line-oriented text forms of trace reports, derivation traces and generation
// records. Symbol strings are space separated with '_' for lambda; state
// encodings never contain whitespace.
//
// Trace report:
//   report family=<f> seed=<n> policy=<p> termination=<t> start=<B> conforming=<bool>
//   prompt: <syms>
//   final: <syms>
//   nonterminal <name> = <state encoding>        (one per distinct state)
//   step=<t> lhs=<syms> -> rhs=<syms> check=<pass|fail|exempt>
//
// Derivation trace:
//   derivation start=<syms> steps=<n>
//   step=<t> production=<i> position=<p> before=<syms> -> after=<syms>
//
// Generation record:
//   generation family=<f> seed=<n> policy=<p> termination=<t> max_T=<n> window=<n|none>
//   prompt: <syms>
//   final: <syms>
//   initial: <encoding>
//   step=<t> token=<tok> before=<encoding> after=<encoding>

#include <charconv>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "lcsg/autoregressive.hpp"
#include "lcsg/csl_bridge.hpp"
#include "lcsg/derivation.hpp"

namespace lcsg {

namespace detail {

inline Error trace_error(std::size_t line, const std::string& msg) {
  return Error::at(ErrorCode::syntax, "trace line " + std::to_string(line) + ": " + msg, line, 1);
}

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    out.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

/// key=value pairs of a whitespace separated header line, after its tag.
inline std::map<std::string, std::string> header_fields(const std::string& line, std::string_view tag, std::size_t n) {
  auto words = split_whitespace(line);
  if (words.empty() || words[0] != tag) throw trace_error(n, "expected '" + std::string(tag) + "' header");
  std::map<std::string, std::string> out;
  for (std::size_t i = 1; i < words.size(); ++i) {
    const auto eq = words[i].find('=');
    if (eq == std::string::npos) throw trace_error(n, "expected key=value, got '" + words[i] + "'");
    out[words[i].substr(0, eq)] = words[i].substr(eq + 1);
  }
  return out;
}

inline const std::string& field(const std::map<std::string, std::string>& f, const std::string& key, std::size_t n) {
  auto it = f.find(key);
  if (it == f.end()) throw trace_error(n, "missing field '" + key + "'");
  return it->second;
}

inline std::uint64_t parse_u64(const std::string& s, std::size_t n) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw trace_error(n, "bad number '" + s + "'");
  return v;
}

inline std::string after_prefix(const std::string& line, std::string_view prefix, std::size_t n) {
  if (!line.starts_with(prefix)) throw trace_error(n, "expected '" + std::string(prefix) + "'");
  std::string rest = line.substr(prefix.size());
  while (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
  return rest;
}

/// Splits "<a><sep><b>" at the first occurrence of sep.
inline std::pair<std::string, std::string> cut(const std::string& s, std::string_view sep, std::size_t n) {
  const auto at = s.find(sep);
  if (at == std::string::npos) throw trace_error(n, "expected '" + std::string(sep) + "'");
  return {s.substr(0, at), s.substr(at + sep.size())};
}

inline PredictorFamily parse_family(const std::string& s, std::size_t n) {
  if (auto f = predictor_family_from_string(s)) return *f;
  throw trace_error(n, "unknown predictor family '" + s + "'");
}

inline DecodingPolicy parse_policy(const std::string& s, std::size_t n) {
  if (auto p = decoding_policy_from_string(s)) return *p;
  throw trace_error(n, "unknown policy '" + s + "'");
}

inline Termination parse_termination(const std::string& s, std::size_t n) {
  if (auto t = termination_from_string(s)) return *t;
  throw trace_error(n, "unknown termination '" + s + "'");
}

/// Symbols named in `nonterminals` become nonterminals, everything else terminals.
inline SymbolString parse_symbols(std::string_view text, const std::set<std::string>& nonterminals) {
  SymbolString out;
  for (auto& w : split_whitespace(text)) {
    if (w == lambda_token) continue;
    out.push_back(nonterminals.contains(w) ? nonterminal(w) : terminal(w));
  }
  return out;
}

}  // namespace detail

inline std::string serialize_trace(const TraceReport& r) {
  std::ostringstream out;
  out << "report family=" << to_string(r.family) << " seed=" << r.seed << " policy=" << to_string(r.policy)
      << " termination=" << to_string(r.termination) << " start=" << r.derivation.start.name
      << " conforming=" << (r.conforming ? "true" : "false") << '\n';
  out << "prompt: " << to_string(r.prompt) << '\n';
  out << "final: " << to_string(r.final) << '\n';
  for (const auto& [name, encoding] : r.derivation.state_table) out << "nonterminal " << name << " = " << encoding << '\n';
  for (std::size_t t = 0; t < r.derivation.productions.size(); ++t) {
    const auto& p = r.derivation.productions[t];
    out << "step=" << t << " lhs=" << to_string(p.lhs) << " -> rhs=" << to_string(p.rhs)
        << " check=" << to_string(r.form_checks[t].verdict) << '\n';
  }
  return out.str();
}

/// Inverse of serialize_trace. Production kinds are positional (first is
/// initial, a lambda rhs is terminal), fail reasons and the replay are
/// recomputed from the productions.
inline TraceReport parse_trace_report(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.size() < 3) throw detail::trace_error(lines.size() + 1, "truncated trace report");
  const auto h = detail::header_fields(lines[0], "report", 1);
  TraceReport r;
  r.family = detail::parse_family(detail::field(h, "family", 1), 1);
  r.seed = detail::parse_u64(detail::field(h, "seed", 1), 1);
  r.policy = detail::parse_policy(detail::field(h, "policy", 1), 1);
  r.termination = detail::parse_termination(detail::field(h, "termination", 1), 1);
  r.derivation.start = nonterminal(detail::field(h, "start", 1));

  std::size_t i = 3;
  std::set<std::string> nts{r.derivation.start.name};
  std::map<std::string, std::string> encoding_of;
  for (; i < lines.size() && lines[i].starts_with("nonterminal "); ++i) {
    auto words = split_whitespace(lines[i]);
    if (words.size() != 4 || words[2] != "=") throw detail::trace_error(i + 1, "expected 'nonterminal <name> = <enc>'");
    nts.insert(words[1]);
    encoding_of[words[1]] = words[3];
    r.derivation.state_table.emplace_back(words[1], words[3]);
  }
  r.prompt = detail::parse_symbols(detail::after_prefix(lines[1], "prompt:", 2), nts);
  r.final = detail::parse_symbols(detail::after_prefix(lines[2], "final:", 3), nts);

  for (; i < lines.size(); ++i) {
    const std::size_t n = i + 1;
    if (lines[i].empty()) continue;
    const std::size_t t = r.derivation.productions.size();
    const std::string rest = detail::after_prefix(lines[i], "step=" + std::to_string(t) + " lhs=", n);
    auto [lhs, tail] = detail::cut(rest, " -> rhs=", n);
    auto [rhs, check] = detail::cut(tail, " check=", n);
    DynamicProduction p;
    p.lhs = detail::parse_symbols(lhs, nts);
    p.rhs = detail::parse_symbols(rhs, nts);
    p.kind = t == 0 ? DynamicProductionKind::initial
                    : (p.rhs.empty() ? DynamicProductionKind::terminal : DynamicProductionKind::interior);
    FormCheck fc = check_left_cs_form(p);
    if (check == "pass") fc.verdict = FormVerdict::pass;
    else if (check == "fail") fc.verdict = FormVerdict::fail;
    else if (check == "exempt") fc.verdict = FormVerdict::exempt_terminal;
    else throw detail::trace_error(n, "unknown check '" + check + "'");
    if (fc.verdict != FormVerdict::fail) fc.reason.clear();
    if (p.kind != DynamicProductionKind::terminal) {
      if (p.rhs.empty() || !p.rhs.back().is_nonterminal())
        throw detail::trace_error(n, "production does not end in a dynamic nonterminal");
      const auto& name = p.rhs.back().name;
      auto it = encoding_of.find(name);
      if (it == encoding_of.end()) throw detail::trace_error(n, "no sidecar entry for '" + name + "'");
      r.derivation.nonterminals.push_back({it->second, r.derivation.nonterminals.size()});
    }
    r.derivation.productions.push_back(std::move(p));
    r.form_checks.push_back(std::move(fc));
  }
  try {
    r.replay_result = replay(r.derivation.productions);
  } catch (const Error& e) {
    r.replay_error = e.what();
  }
  r.conforming = evaluate_conformance(r);
  return r;
}

inline std::string serialize_trace(const DerivationTrace& trace) {
  std::ostringstream out;
  out << "derivation start=" << to_string(trace.start) << " steps=" << trace.steps.size() << '\n';
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const auto& s = trace.steps[t];
    out << "step=" << t << " production=" << s.production_index << " position=" << s.position
        << " before=" << to_string(s.before) << " -> after=" << to_string(s.after) << '\n';
  }
  return out.str();
}

/// Symbol kinds come from the grammar the trace was produced with.
inline DerivationTrace parse_derivation_trace(std::string_view text, const Grammar& g) {
  std::set<std::string> nts;
  for (const auto& s : g.nonterminals) nts.insert(s.name);
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw detail::trace_error(1, "empty derivation trace");
  const std::string head = detail::after_prefix(lines[0], "derivation start=", 1);
  auto [start, count] = detail::cut(head, " steps=", 1);
  DerivationTrace trace;
  trace.start = detail::parse_symbols(start, nts);
  const std::size_t steps = detail::parse_u64(count, 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t n = i + 1;
    const std::string rest =
        detail::after_prefix(lines[i], "step=" + std::to_string(trace.steps.size()) + " production=", n);
    auto [prod, r1] = detail::cut(rest, " position=", n);
    auto [pos, r2] = detail::cut(r1, " before=", n);
    auto [before, after] = detail::cut(r2, " -> after=", n);
    trace.steps.push_back({detail::parse_symbols(before, nts), detail::parse_u64(prod, n), detail::parse_u64(pos, n),
                           detail::parse_symbols(after, nts)});
  }
  if (trace.steps.size() != steps) throw detail::trace_error(lines.size(), "step count differs from header");
  return trace;
}

inline std::string serialize_trace(const GenerationRecord& rec) {
  std::ostringstream out;
  out << "generation family=" << to_string(rec.family) << " seed=" << rec.seed << " policy=" << to_string(rec.policy)
      << " termination=" << to_string(rec.termination) << " max_T=" << rec.max_t
      << " window=" << (rec.window ? std::to_string(*rec.window) : std::string("none")) << '\n';
  out << "prompt: " << to_string(rec.prompt) << '\n';
  out << "final: " << to_string(rec.final) << '\n';
  out << "initial: " << rec.initial_state.encoding << '\n';
  for (std::size_t t = 0; t < rec.steps.size(); ++t) {
    const auto& s = rec.steps[t];
    out << "step=" << t << " token=" << s.token.name << " before=" << s.before.encoding << " after=" << s.after.encoding
        << '\n';
  }
  return out.str();
}

inline GenerationRecord parse_generation_record(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.size() < 4) throw detail::trace_error(lines.size() + 1, "truncated generation record");
  const auto h = detail::header_fields(lines[0], "generation", 1);
  GenerationRecord rec;
  rec.family = detail::parse_family(detail::field(h, "family", 1), 1);
  rec.seed = detail::parse_u64(detail::field(h, "seed", 1), 1);
  rec.policy = detail::parse_policy(detail::field(h, "policy", 1), 1);
  rec.termination = detail::parse_termination(detail::field(h, "termination", 1), 1);
  rec.max_t = detail::parse_u64(detail::field(h, "max_T", 1), 1);
  if (const auto& w = detail::field(h, "window", 1); w != "none") rec.window = detail::parse_u64(w, 1);
  rec.prompt = terminal_string(detail::after_prefix(lines[1], "prompt:", 2));
  rec.final = terminal_string(detail::after_prefix(lines[2], "final:", 3));
  rec.initial_state = {rec.family, detail::after_prefix(lines[3], "initial:", 4)};
  for (std::size_t i = 4; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t n = i + 1;
    const std::string rest = detail::after_prefix(lines[i], "step=" + std::to_string(rec.steps.size()) + " token=", n);
    auto [token, r1] = detail::cut(rest, " before=", n);
    auto [before, after] = detail::cut(r1, " after=", n);
    rec.steps.push_back({{rec.family, before}, terminal(token), {rec.family, after}});
  }
  return rec;
}

}  // namespace lcsg
