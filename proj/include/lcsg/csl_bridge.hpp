#pragma once

// Reading a generation run as a left context-sensitive derivation:
//
//   B              -> alpha_0 A_0                      (initial)
//   alpha_t A_t    -> alpha_t tau_{t+1} A_{t+1}         (interior, one per token)
//   A_T            -> lambda                           (terminal)
//
// A_t is the predictor state AM_t; two dynamic nonterminals are the same
// symbol exactly when their state encodings are equal.

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lcsg/autoregressive.hpp"
#include "lcsg/grammar.hpp"

namespace lcsg {

struct DynamicNonterminal {
  std::string id;  // state encoding
  std::size_t step = 0;

  friend bool operator==(const DynamicNonterminal& a, const DynamicNonterminal& b) { return a.id == b.id; }
};

enum class DynamicProductionKind { initial, interior, terminal };

inline std::string_view to_string(DynamicProductionKind k) {
  switch (k) {
    case DynamicProductionKind::initial: return "initial";
    case DynamicProductionKind::interior: return "interior";
    case DynamicProductionKind::terminal: return "terminal";
  }
  return "?";
}

struct DynamicProduction {
  DynamicProductionKind kind = DynamicProductionKind::interior;
  SymbolString lhs;
  SymbolString rhs;

  friend bool operator==(const DynamicProduction&, const DynamicProduction&) = default;
};

/// Productions of one run plus the sidecar mapping rendered nonterminal names
/// (`A#<hash prefix>`) back to full state encodings.
struct ExtractedDerivation {
  Symbol start;
  std::vector<DynamicProduction> productions;
  std::vector<DynamicNonterminal> nonterminals;                   // A_0 .. A_T
  std::vector<std::pair<std::string, std::string>> state_table;  // name -> encoding, first-use order

  friend bool operator==(const ExtractedDerivation&, const ExtractedDerivation&) = default;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

inline ExtractedDerivation extract_productions(const GenerationRecord& rec) {
  if (!rec.conforming())
    throw Error(ErrorCode::nonconforming_record, "sliding-window records have no left context-sensitive reading");
  for (std::size_t t = 0; t + 1 < rec.steps.size(); ++t)
    if (rec.steps[t].after != rec.steps[t + 1].before)
      throw Error::at_index(ErrorCode::invalid_argument, "record states do not chain at step " + std::to_string(t), t);
  if (!rec.steps.empty() && rec.steps.front().before != rec.initial_state)
    throw Error(ErrorCode::invalid_argument, "first step does not start from the initial state");

  std::set<std::string> taken;
  for (const auto& s : rec.final) taken.insert(s.name);

  ExtractedDerivation out;
  std::string start_name = "B";
  while (taken.contains(start_name)) start_name += '#';
  taken.insert(start_name);
  out.start = nonterminal(start_name);

  std::map<std::string, std::string> name_of;  // encoding -> name
  auto symbol_for = [&](const PredictorState& s) {
    if (auto it = name_of.find(s.encoding); it != name_of.end()) return nonterminal(it->second);
    const std::string hex = detail::hex64(detail::fnv1a64(s.encoding));
    std::string name;
    for (std::size_t len = 8; len <= hex.size(); len += 8) {
      name = "A#" + hex.substr(0, len);
      if (!taken.contains(name)) break;
    }
    while (taken.contains(name)) name += '\'';
    taken.insert(name);
    name_of.emplace(s.encoding, name);
    out.state_table.emplace_back(name, s.encoding);
    return nonterminal(name);
  };

  std::vector<PredictorState> states{rec.initial_state};
  for (const auto& step : rec.steps) states.push_back(step.after);
  std::vector<Symbol> a;
  for (std::size_t t = 0; t < states.size(); ++t) {
    a.push_back(symbol_for(states[t]));
    out.nonterminals.push_back({states[t].encoding, t});
  }

  SymbolString alpha = rec.prompt;
  {
    SymbolString rhs = alpha;
    rhs.push_back(a[0]);
    out.productions.push_back({DynamicProductionKind::initial, {out.start}, rhs});
  }
  for (std::size_t t = 0; t < rec.steps.size(); ++t) {
    SymbolString lhs = alpha, rhs = alpha;
    lhs.push_back(a[t]);
    rhs.push_back(rec.steps[t].token);
    rhs.push_back(a[t + 1]);
    out.productions.push_back({DynamicProductionKind::interior, std::move(lhs), std::move(rhs)});
    alpha.push_back(rec.steps[t].token);
  }
  out.productions.push_back({DynamicProductionKind::terminal, {a.back()}, {}});
  return out;
}

enum class FormVerdict { pass, fail, exempt_terminal };

inline std::string_view to_string(FormVerdict v) {
  switch (v) {
    case FormVerdict::pass: return "pass";
    case FormVerdict::fail: return "fail";
    case FormVerdict::exempt_terminal: return "exempt";
  }
  return "?";
}

struct FormCheck {
  FormVerdict verdict = FormVerdict::pass;
  std::string reason;  // set for fail

  friend bool operator==(const FormCheck&, const FormCheck&) = default;
};

/// alpha A -> alpha R with R non-empty. The closing A_T -> lambda cannot meet
/// R in V+ and is reported as exempt rather than passed.
inline FormCheck check_left_cs_form(const DynamicProduction& p) {
  if (p.kind == DynamicProductionKind::terminal && p.rhs.empty() && p.lhs.size() == 1 && p.lhs[0].is_nonterminal())
    return {FormVerdict::exempt_terminal, {}};
  if (p.lhs.empty() || !p.lhs.back().is_nonterminal()) return {FormVerdict::fail, "lhs does not end in a nonterminal"};
  const std::size_t alpha = p.lhs.size() - 1;
  if (p.rhs.size() < alpha || !std::equal(p.lhs.begin(), p.lhs.end() - 1, p.rhs.begin()))
    return {FormVerdict::fail, "prefix changed"};
  if (p.rhs.size() == alpha) return {FormVerdict::fail, "R is empty"};
  return {FormVerdict::pass, {}};
}

/// Re-derives the generated string from the productions, alternating the
/// rewrite (ntp) with the bookkeeping context update (cwu) that moves the
/// emitted terminals of R into the context and keeps the new nonterminal.
inline SymbolString replay(std::span<const DynamicProduction> productions) {
  if (productions.empty()) throw Error::at_index(ErrorCode::replay_mismatch, "no productions to replay", 0);
  const auto& first = productions.front();
  if (first.lhs.size() != 1 || !first.lhs[0].is_nonterminal())
    throw Error::at_index(ErrorCode::replay_mismatch, "first production does not rewrite a start symbol", 0);

  SymbolString context;             // alpha_t
  SymbolString tail = first.lhs;    // [A_t]; the form is context ++ tail
  bool finished = false;
  for (std::size_t i = 0; i < productions.size(); ++i) {
    const auto& p = productions[i];
    auto mismatch = [&](const std::string& why) {
      SymbolString form = context;
      form.insert(form.end(), tail.begin(), tail.end());
      return Error::at_index(ErrorCode::replay_mismatch,
                             "production " + std::to_string(i) + " (" + to_string(p.lhs) + " -> " + to_string(p.rhs) +
                                 ") does not apply to '" + to_string(form) + "': " + why,
                             i);
    };
    if (finished) throw mismatch("derivation already ended");
    if (p.kind == DynamicProductionKind::terminal) {
      if (tail != p.lhs) throw mismatch("lhs is not the pending nonterminal");
      tail = p.rhs;
      if (!is_all_terminal(tail)) throw mismatch("terminal production leaves a nonterminal");
      context.insert(context.end(), tail.begin(), tail.end());
      tail.clear();
      finished = true;
      continue;
    }
    // ntp: the whole current form must be the lhs
    if (p.lhs.size() != context.size() + tail.size() || !std::equal(context.begin(), context.end(), p.lhs.begin()) ||
        !std::equal(tail.begin(), tail.end(), p.lhs.begin() + static_cast<std::ptrdiff_t>(context.size())))
      throw mismatch("lhs differs from the current form");
    if (p.rhs.size() < context.size() || !std::equal(context.begin(), context.end(), p.rhs.begin()))
      throw mismatch("rhs does not keep the context");
    // cwu: split R into emitted terminals and the next nonterminal
    SymbolString r(p.rhs.begin() + static_cast<std::ptrdiff_t>(context.size()), p.rhs.end());
    std::size_t k = 0;
    while (k < r.size() && r[k].is_terminal()) ++k;
    if (r.size() - k > 1) throw mismatch("R carries more than one nonterminal");
    context.insert(context.end(), r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k));
    tail.assign(r.begin() + static_cast<std::ptrdiff_t>(k), r.end());
    if (tail.empty()) finished = true;
  }
  if (!tail.empty())
    throw Error::at_index(ErrorCode::replay_mismatch, "derivation ends at nonterminal '" + to_string(tail) + "'",
                          productions.size());
  return context;
}

struct TraceReport {
  ExtractedDerivation derivation;
  std::vector<FormCheck> form_checks;
  SymbolString replay_result;
  std::optional<std::string> replay_error;
  bool conforming = false;

  // run metadata carried into the serialized header
  PredictorFamily family = PredictorFamily::grammar;
  std::uint64_t seed = 0;
  DecodingPolicy policy = DecodingPolicy::greedy;
  Termination termination = Termination::max_t_reached;
  SymbolString prompt;
  SymbolString final;

  std::size_t count(FormVerdict v) const {
    return static_cast<std::size_t>(std::count_if(form_checks.begin(), form_checks.end(),
                                                  [&](const FormCheck& c) { return c.verdict == v; }));
  }

  friend bool operator==(const TraceReport&, const TraceReport&) = default;
};

inline bool evaluate_conformance(const TraceReport& r) {
  if (r.replay_error || r.replay_result != r.final) return false;
  std::size_t exempt = 0;
  for (std::size_t i = 0; i < r.form_checks.size(); ++i) {
    const auto kind = r.derivation.productions[i].kind;
    const auto verdict = r.form_checks[i].verdict;
    if (kind == DynamicProductionKind::terminal) exempt += verdict == FormVerdict::exempt_terminal;
    else if (verdict != FormVerdict::pass) return false;
  }
  return exempt == 1;
}

inline TraceReport make_trace_report(const GenerationRecord& rec) {
  TraceReport r;
  r.derivation = extract_productions(rec);
  for (const auto& p : r.derivation.productions) r.form_checks.push_back(check_left_cs_form(p));
  try {
    r.replay_result = replay(r.derivation.productions);
  } catch (const Error& e) {
    r.replay_error = e.what();
  }
  r.family = rec.family;
  r.seed = rec.seed;
  r.policy = rec.policy;
  r.termination = rec.termination;
  r.prompt = rec.prompt;
  r.final = rec.final;
  r.conforming = evaluate_conformance(r);
  return r;
}

}  // namespace lcsg
