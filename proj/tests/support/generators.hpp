#pragma once

// Seeded random inputs for property tests. Every generator takes an lcsg::Rng
// so a failing case is reproduced from its seed alone.

#include <string>
#include <vector>

#include "lcsg/grammar.hpp"
#include "lcsg/predictor.hpp"
#include "lcsg/random.hpp"

namespace gen {

using lcsg::Grammar;
using lcsg::Production;
using lcsg::Rng;
using lcsg::Symbol;
using lcsg::SymbolString;

inline std::size_t below(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng.next() % n); }

inline std::vector<Symbol> terminals(std::size_t n) {
  std::vector<Symbol> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(lcsg::terminal(std::string(1, static_cast<char>('a' + i))));
  return out;
}

inline std::vector<Symbol> nonterminals(std::size_t n) {
  static const char* names[] = {"S", "A", "B", "C", "D", "E"};
  std::vector<Symbol> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(lcsg::nonterminal(names[i]));
  return out;
}

inline SymbolString random_string(Rng& rng, const std::vector<Symbol>& alphabet, std::size_t min_len,
                                  std::size_t max_len) {
  const std::size_t n = min_len + below(rng, max_len - min_len + 1);
  SymbolString out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[below(rng, alphabet.size())]);
  return out;
}

/// Weighted grammar whose sentential forms are always terminals followed by
/// at most one nonterminal. Every nonterminal has a context-free terminating
/// rule so no reachable form is a dead end, and at least one rule uses left
/// context.
inline Grammar left_linear_grammar(Rng& rng) {
  Grammar g;
  g.terminals = terminals(2 + below(rng, 2));
  g.nonterminals = nonterminals(2 + below(rng, 3));
  g.start = g.nonterminals[0];
  auto t = [&] { return g.terminals[below(rng, g.terminals.size())]; };
  auto n = [&] { return g.nonterminals[below(rng, g.nonterminals.size())]; };
  auto w = [&] { return 0.1 + rng.uniform(); };
  bool has_context = false;
  for (const auto& nt : g.nonterminals) {
    g.productions.push_back({{nt}, {t()}, w()});
    const std::size_t extra = 1 + below(rng, 3);
    for (std::size_t k = 0; k < extra; ++k) {
      switch (below(rng, 4)) {
        case 0: g.productions.push_back({{nt}, {t(), n()}, w()}); break;
        case 1: g.productions.push_back({{nt}, {t(), t(), n()}, w()}); break;
        case 2: g.productions.push_back({{nt}, {t(), t()}, w()}); break;
        default: {
          SymbolString alpha = random_string(rng, g.terminals, 1, 2);
          SymbolString lhs = alpha, rhs = alpha;
          lhs.push_back(nt);
          rhs.push_back(t());
          if (below(rng, 3) != 0) rhs.push_back(n());
          g.productions.push_back({lhs, rhs, w()});
          has_context = true;
        }
      }
    }
  }
  if (!has_context) {
    const auto a = t();
    g.productions.push_back({{a, g.nonterminals[0]}, {a, t(), n()}, w()});
  }
  return g;
}

/// Noncontracting grammar with context-free, left-context, two-sided context
/// and swap rules mixed, small enough for exhaustive oracles at length 6.
inline Grammar noncontracting_grammar(Rng& rng) {
  Grammar g;
  g.terminals = terminals(2 + below(rng, 2));
  g.nonterminals = nonterminals(2 + below(rng, 2));
  g.start = g.nonterminals[0];
  auto t = [&] { return g.terminals[below(rng, g.terminals.size())]; };
  auto n = [&] { return g.nonterminals[below(rng, g.nonterminals.size())]; };
  auto any = [&] { return below(rng, 2) ? t() : n(); };
  for (const auto& nt : g.nonterminals) g.productions.push_back({{nt}, {t()}, 1.0});
  const std::size_t extra = 3 + below(rng, 5);
  for (std::size_t k = 0; k < extra; ++k) {
    switch (below(rng, 5)) {
      case 0: g.productions.push_back({{n()}, {any(), any()}, 1.0}); break;
      case 1: g.productions.push_back({{n()}, {t(), n(), any()}, 1.0}); break;
      case 2: {
        const auto a = t();
        g.productions.push_back({{a, n()}, {a, any(), any()}, 1.0});
        break;
      }
      case 3: {
        const auto a = t();
        const auto b = t();
        g.productions.push_back({{a, n(), b}, {a, t(), b}, 1.0});
        break;
      }
      default: g.productions.push_back({{n(), n()}, {n(), n()}, 1.0});
    }
  }
  return g;
}

inline std::vector<SymbolString> corpus(Rng& rng, const std::vector<Symbol>& vocab, std::size_t lines,
                                        std::size_t max_len) {
  std::vector<SymbolString> out;
  for (std::size_t i = 0; i < lines; ++i) out.push_back(random_string(rng, vocab, 0, max_len));
  return out;
}

}  // namespace gen
