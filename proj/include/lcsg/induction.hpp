#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lcsg/derivation.hpp"
#include "lcsg/grammar_io.hpp"
#include "lcsg/predictor.hpp"
#include "lcsg/stochastic.hpp"

namespace lcsg {

struct InducedGrammar {
  WeightedGrammar grammar;
  std::vector<std::pair<std::string, std::string>> state_table;  // nonterminal name -> state encoding
  /// Some state first reached at the depth limit had token transitions that
  /// were not followed. They lead to a nonterminal without productions, so
  /// string probabilities stay exact up to that depth and longer strings are
  /// absent.
  bool truncated = false;
};

inline constexpr std::size_t default_state_budget = 10'000;

/// Explicit weighted grammar of a finite-state predictor: one nonterminal per
/// distinct state reachable within `max_context_len` tokens, productions
/// s -> tau s' (transition probability) and s -> lambda (END probability),
/// and B -> s_0. Right-linear by construction.
inline InducedGrammar induce_grammar(const Predictor& predictor, std::size_t max_context_len,
                                     std::size_t state_budget = default_state_budget) {
  if (!predictor.finite_state())
    throw Error(ErrorCode::unsupported_infinite_state,
                std::string(to_string(predictor.family())) + " predictors have no finite state set to induce from");
  const auto& vocab = predictor.vocabulary();

  Grammar g;
  std::set<std::string> used;
  for (const auto& t : vocab.tokens()) {
    g.terminals.push_back(t);
    used.insert(t.name);
  }
  std::string start_name = "B";
  while (used.contains(start_name)) start_name += '#';
  used.insert(start_name);
  g.start = nonterminal(start_name);
  g.nonterminals.push_back(g.start);

  struct Node {
    PredictorState state;
    SymbolString context;  // shortest context reaching the state
    std::size_t depth;
    Symbol symbol;
  };
  std::vector<Node> nodes;
  std::map<std::string, std::size_t> index;
  auto intern = [&](const PredictorState& s, SymbolString context, std::size_t depth) {
    if (auto it = index.find(s.encoding); it != index.end()) return it->second;
    if (nodes.size() >= state_budget)
      throw Error(ErrorCode::state_budget_exceeded, "more than " + std::to_string(state_budget) + " distinct states");
    std::string base = "s_" + predictor.state_label(s);
    if (!symbol_name_problem(base).empty()) base = "s_" + std::to_string(nodes.size());
    std::string name = base;
    for (int n = 2; used.contains(name); ++n) name = base + "~" + std::to_string(n);
    used.insert(name);
    index.emplace(s.encoding, nodes.size());
    nodes.push_back({s, std::move(context), depth, nonterminal(name)});
    g.nonterminals.push_back(nodes.back().symbol);
    return nodes.size() - 1;
  };

  std::optional<Symbol> cut;
  auto cut_symbol = [&] {
    if (!cut) {
      std::string name = "s_cut";
      while (used.contains(name)) name += '~';
      used.insert(name);
      cut = nonterminal(name);
    }
    return *cut;
  };

  InducedGrammar out{WeightedGrammar(Grammar{{nonterminal("B")}, {}, nonterminal("B"), {}}), {}, false};
  intern(predictor.initial_state({}), {}, 0);
  g.productions.push_back({{g.start}, {nodes[0].symbol}, 1.0});
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    const Node current = nodes[head];
    auto prediction = predictor.next_distribution(current.state, current.context);
    const auto& d = prediction.distribution;
    const bool frontier = current.depth >= max_context_len;
    for (std::size_t tok = 0; tok < vocab.size(); ++tok) {
      if (d.token(tok) <= 0) continue;
      if (frontier) {
        out.truncated = true;
        g.productions.push_back({{current.symbol}, {vocab[tok], cut_symbol()}, d.token(tok)});
        continue;
      }
      SymbolString ctx = current.context;
      ctx.push_back(vocab[tok]);
      const std::size_t next = intern(*prediction.successors[tok], std::move(ctx), current.depth + 1);
      g.productions.push_back({{current.symbol}, {vocab[tok], nodes[next].symbol}, d.token(tok)});
    }
    if (d.end() > 0) g.productions.push_back({{current.symbol}, {}, d.end()});
  }
  if (cut) g.nonterminals.push_back(*cut);
  for (const auto& n : nodes) out.state_table.emplace_back(n.symbol.name, n.state.encoding);
  out.grammar = WeightedGrammar(std::move(g));
  return out;
}

/// Lambda-free equivalent of a right-linear weighted grammar whose start
/// symbol has the single production B -> N and whose other productions are
/// N -> lambda, N -> t or N -> t N'. With e(N) the normalized lambda weight of
/// N, each N -> t N' (probability p) becomes N -> t [p e(N')] and
/// N -> t N' [p (1 - e(N'))]; B copies N's rules and gains B -> lambda [e(N)].
/// String probabilities are preserved exactly; zero-weight rules are dropped.
/// A nonterminal without productions has e(N) = 0 and stays a dead end.
inline WeightedGrammar eliminate_lambda(const WeightedGrammar& wg) {
  const Grammar& g = wg.grammar();
  std::vector<std::size_t> start_rules;
  std::map<std::string, double> total, lambda_w, nonlambda_w;
  for (std::size_t i = 0; i < g.productions.size(); ++i) {
    const auto& p = g.productions[i];
    if (p.lhs.size() != 1 || !p.lhs[0].is_nonterminal())
      throw Error(ErrorCode::invalid_argument, "eliminate_lambda needs a right-linear grammar");
    const double w = wg.weights()[i];
    if (p.lhs[0] == g.start) {
      if (p.rhs.size() != 1 || !p.rhs[0].is_nonterminal())
        throw Error(ErrorCode::invalid_argument, "start must have the single form B -> N");
      start_rules.push_back(i);
      continue;
    }
    const bool ok = p.rhs.empty() || (p.rhs.size() == 1 && p.rhs[0].is_terminal()) ||
                    (p.rhs.size() == 2 && p.rhs[0].is_terminal() && p.rhs[1].is_nonterminal());
    if (!ok || (p.rhs.size() == 2 && p.rhs[1] == g.start))
      throw Error(ErrorCode::invalid_argument, "production " + std::to_string(i) + " is not N -> lambda | t | t N");
    total[p.lhs[0].name] += w;
    (p.rhs.empty() ? lambda_w : nonlambda_w)[p.lhs[0].name] += w;
  }
  if (start_rules.size() != 1) throw Error(ErrorCode::invalid_argument, "start must have exactly one production");

  auto e = [&](const Symbol& n) {
    const double t = total[n.name];
    return t > 0 ? lambda_w[n.name] / t : 0.0;
  };
  auto not_e = [&](const Symbol& n) {
    const double t = total[n.name];
    return t > 0 ? nonlambda_w[n.name] / t : 0.0;
  };

  auto expand = [&](const Symbol& n, const Symbol& lhs, std::vector<Production>& out) {
    const double t = total[n.name];
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
      const auto& p = g.productions[i];
      if (p.lhs[0] != n || p.rhs.empty()) continue;
      const double prob = wg.weights()[i] / t;
      if (prob <= 0) continue;
      if (p.rhs.size() == 1) {
        out.push_back({{lhs}, p.rhs, prob});
        continue;
      }
      const Symbol& next = p.rhs[1];
      if (const double stop = prob * e(next); stop > 0) out.push_back({{lhs}, {p.rhs[0]}, stop});
      if (const double go = prob * not_e(next); go > 0) out.push_back({{lhs}, p.rhs, go});
    }
  };

  Grammar out{g.nonterminals, g.terminals, g.start, {}};
  const Symbol first = g.productions[start_rules[0]].rhs[0];
  if (const double stop = e(first); stop > 0) out.productions.push_back({{g.start}, {}, stop});
  if (total[first.name] > 0) expand(first, g.start, out.productions);
  for (const auto& n : g.nonterminals)
    if (n != g.start && total[n.name] > 0) expand(n, n, out.productions);
  return WeightedGrammar(std::move(out));
}

struct EquivalenceResult {
  bool equivalent = true;
  std::optional<SymbolString> counterexample;  // shortlex-smallest string in exactly one language
  int generated_by = 0;                        // 1 or 2: which grammar contains the counterexample
};

/// Compares L(g1) and L(g2) on strings up to max_len.
inline EquivalenceResult check_weak_equivalence(const Grammar& g1, const Grammar& g2, std::size_t max_len,
                                                std::size_t fuel = default_fuel) {
  std::set<std::string> t1, t2;
  for (const auto& s : g1.terminals) t1.insert(s.name);
  for (const auto& s : g2.terminals) t2.insert(s.name);
  if (t1 != t2) throw Error(ErrorCode::invalid_argument, "grammars have different terminal alphabets");
  const Language l1 = enumerate_language(g1, max_len, fuel);
  const Language l2 = enumerate_language(g2, max_len, fuel);
  EquivalenceResult r;
  auto i1 = l1.begin();
  auto i2 = l2.begin();
  ShortlexLess less;
  while (i1 != l1.end() || i2 != l2.end()) {
    if (i2 == l2.end() || (i1 != l1.end() && less(*i1, *i2))) {
      r = {false, *i1, 1};
      return r;
    }
    if (i1 == l1.end() || less(*i2, *i1)) {
      r = {false, *i2, 2};
      return r;
    }
    ++i1;
    ++i2;
  }
  return r;
}

}  // namespace lcsg
