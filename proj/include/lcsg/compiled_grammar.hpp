#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lcsg/grammar.hpp"

namespace lcsg::detail {

/// Sentential forms as strings of symbol ids; std::u32string gives hashing and
/// substring search for free.
using Form = std::u32string;

struct CompiledProduction {
  Form lhs;
  Form rhs;
  double weight;
};

/// Integer-coded view of a validated grammar used by the search engines.
/// Ids: nonterminals first (declaration order), then terminals.
class CompiledGrammar {
 public:
  explicit CompiledGrammar(const Grammar& g) : grammar_(&g) {
    for (const auto& s : g.nonterminals) add(s);
    for (const auto& s : g.terminals) add(s);
    start_ = id_of(g.start);
    by_first_.resize(symbols_.size());
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
      const auto& p = g.productions[i];
      productions_.push_back({encode(p.lhs), encode(p.rhs), p.weight_or_default()});
      if (!p.lhs.empty()) by_first_[productions_.back().lhs.front()].push_back(i);
    }
    analyze();
  }

  const Grammar& grammar() const noexcept { return *grammar_; }
  const std::vector<CompiledProduction>& productions() const noexcept { return productions_; }
  char32_t start() const noexcept { return start_; }
  std::size_t symbol_count() const noexcept { return symbols_.size(); }
  bool is_terminal(char32_t id) const noexcept { return symbols_[id].is_terminal(); }
  const Symbol& symbol(char32_t id) const noexcept { return symbols_[id]; }

  bool all_terminal(const Form& w) const noexcept {
    for (char32_t c : w)
      if (!is_terminal(c)) return false;
    return true;
  }

  /// Leading terminals of every lhs reappear at the front of its rhs, so the
  /// terminal prefix of a form (up to its first nonterminal) never changes.
  bool prefix_preserving() const noexcept { return prefix_preserving_; }

  /// No production lowers the number of occurrences of this terminal.
  bool count_monotone(char32_t id) const noexcept { return count_monotone_[id]; }

  std::optional<char32_t> find_id(const Symbol& s) const {
    auto it = ids_.find(s.name);
    if (it == ids_.end() || symbols_[it->second].kind != s.kind) return std::nullopt;
    return it->second;
  }

  char32_t id_of(const Symbol& s) const {
    if (auto id = find_id(s)) return *id;
    throw Error(ErrorCode::undeclared_symbol, "symbol '" + s.name + "' is not in the grammar's alphabet");
  }

  Form encode(std::span<const Symbol> s) const {
    Form out;
    out.reserve(s.size());
    for (const auto& x : s) out.push_back(id_of(x));
    return out;
  }

  SymbolString decode(const Form& w) const {
    SymbolString out;
    out.reserve(w.size());
    for (char32_t c : w) out.push_back(symbols_[c]);
    return out;
  }

  /// Calls f(production_index, position) for every redex of w, ordered by
  /// (position, production_index).
  template <class F>
  void for_each_redex(const Form& w, F&& f) const {
    for (std::size_t pos = 0; pos < w.size(); ++pos) {
      for (std::size_t i : by_first_[w[pos]]) {
        const Form& lhs = productions_[i].lhs;
        if (pos + lhs.size() <= w.size() && w.compare(pos, lhs.size(), lhs) == 0) f(i, pos);
      }
    }
  }

  static Form rewrite(const Form& w, const CompiledProduction& p, std::size_t pos) {
    Form out;
    out.reserve(w.size() - p.lhs.size() + p.rhs.size());
    out.append(w, 0, pos);
    out.append(p.rhs);
    out.append(w, pos + p.lhs.size());
    return out;
  }

 private:
  void add(const Symbol& s) {
    ids_.emplace(s.name, static_cast<char32_t>(symbols_.size()));
    symbols_.push_back(s);
  }

  void analyze() {
    prefix_preserving_ = true;
    count_monotone_.assign(symbols_.size(), true);
    for (const auto& p : productions_) {
      std::size_t lead = 0;
      while (lead < p.lhs.size() && is_terminal(p.lhs[lead])) ++lead;
      if (p.rhs.size() < lead || p.rhs.compare(0, lead, p.lhs, 0, lead) != 0) prefix_preserving_ = false;
      std::unordered_map<char32_t, long> delta;
      for (char32_t c : p.lhs) --delta[c];
      for (char32_t c : p.rhs) ++delta[c];
      for (auto [c, d] : delta)
        if (d < 0) count_monotone_[c] = false;
    }
  }

  const Grammar* grammar_;
  std::vector<Symbol> symbols_;
  std::unordered_map<std::string, char32_t> ids_;
  char32_t start_ = 0;
  std::vector<CompiledProduction> productions_;
  std::vector<std::vector<std::size_t>> by_first_;
  bool prefix_preserving_ = true;
  std::vector<bool> count_monotone_;
};

}  // namespace lcsg::detail
