#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "lcsg/compiled_grammar.hpp"
#include "lcsg/grammar.hpp"

namespace lcsg {

/// One application of production `production_index` at `position`:
/// before = u lhs v, after = u rhs v with |u| = position.
struct DerivationStep {
  SymbolString before;
  std::size_t production_index = 0;
  std::size_t position = 0;
  SymbolString after;

  friend bool operator==(const DerivationStep&, const DerivationStep&) = default;
};

/// A witnessed chain start => ... => result. Steps index productions of the
/// grammar the trace was produced from.
struct DerivationTrace {
  SymbolString start;
  std::vector<DerivationStep> steps;

  const SymbolString& result() const noexcept { return steps.empty() ? start : steps.back().after; }

  friend bool operator==(const DerivationTrace&, const DerivationTrace&) = default;
};

inline constexpr std::size_t default_fuel = 1'000'000;

inline SymbolString apply_step(std::span<const Symbol> w, const Production& p, std::size_t position) {
  if (position > w.size() || p.lhs.size() > w.size() - position)
    throw Error(ErrorCode::out_of_range, "lhs window [" + std::to_string(position) + ", " +
                                             std::to_string(position + p.lhs.size()) + ") exceeds form of length " +
                                             std::to_string(w.size()));
  if (!std::equal(p.lhs.begin(), p.lhs.end(), w.begin() + static_cast<std::ptrdiff_t>(position)))
    throw Error(ErrorCode::no_match, "'" + to_string(p.lhs) + "' does not occur at position " + std::to_string(position));
  SymbolString out(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(position));
  out.insert(out.end(), p.rhs.begin(), p.rhs.end());
  out.insert(out.end(), w.begin() + static_cast<std::ptrdiff_t>(position + p.lhs.size()), w.end());
  return out;
}

/// Every applicable step of w, ordered by (position, production_index).
inline std::vector<DerivationStep> successors(std::span<const Symbol> w, const Grammar& g) {
  std::vector<DerivationStep> out;
  for (std::size_t pos = 0; pos < w.size(); ++pos)
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
      const auto& lhs = g.productions[i].lhs;
      if (lhs.empty() || lhs.size() > w.size() - pos) continue;
      if (!std::equal(lhs.begin(), lhs.end(), w.begin() + static_cast<std::ptrdiff_t>(pos))) continue;
      SymbolString before(w.begin(), w.end());
      out.push_back({before, i, pos, apply_step(w, g.productions[i], pos)});
    }
  return out;
}

enum class SearchStatus { found, not_found, fuel_exhausted };

inline std::string_view to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::found: return "found";
    case SearchStatus::not_found: return "not_found";
    case SearchStatus::fuel_exhausted: return "fuel_exhausted";
  }
  return "?";
}

struct MembershipResult {
  SearchStatus status = SearchStatus::not_found;
  std::optional<DerivationTrace> trace;  // set iff status == found
  std::size_t expanded = 0;
};

struct SearchOptions {
  std::size_t fuel = default_fuel;
  /// Terminal-prefix and terminal-count pruning. Both are sound for grammars
  /// with the corresponding structural property and are skipped otherwise.
  bool prune = true;
  /// Longest sentential form explored; defaults to |target|. Larger caps only
  /// cost time on noncontracting grammars.
  std::optional<std::size_t> length_cap;
};

namespace detail {

inline void require_noncontracting(const Grammar& g) {
  auto report = validate_grammar(g);
  if (!report.ok()) throw Error(ErrorCode::invalid_grammar, report.violations.front());
  if (!report.noncontracting) throw Error(ErrorCode::not_noncontracting, "grammar has a contracting production");
}

/// Discards forms that provably cannot derive `goal`: a changed terminal prefix
/// (prefix-preserving grammars) or too many copies of a terminal whose count
/// never decreases.
class TargetPruner {
 public:
  TargetPruner(const CompiledGrammar& cg, const Form& goal, bool enabled)
      : cg_(&cg), goal_(goal), enabled_(enabled), prefix_rule_(cg.prefix_preserving()),
        goal_counts_(cg.symbol_count(), 0), counts_(cg.symbol_count(), 0) {
    for (char32_t c : goal) ++goal_counts_[c];
  }

  bool operator()(const Form& w) {
    if (!enabled_) return false;
    if (prefix_rule_)
      for (std::size_t i = 0; i < w.size() && cg_->is_terminal(w[i]); ++i)
        if (i >= goal_.size() || w[i] != goal_[i]) return true;
    std::fill(counts_.begin(), counts_.end(), 0);
    for (char32_t c : w)
      if (cg_->is_terminal(c) && cg_->count_monotone(c) && ++counts_[c] > goal_counts_[c]) return true;
    return false;
  }

 private:
  const CompiledGrammar* cg_;
  Form goal_;
  bool enabled_;
  bool prefix_rule_;
  std::vector<std::size_t> goal_counts_;
  std::vector<std::size_t> counts_;
};

struct SearchNode {
  Form form;
  std::size_t parent;
  std::size_t production;
  std::size_t position;
};

inline DerivationTrace rebuild_trace(const CompiledGrammar& cg, const std::vector<SearchNode>& nodes, std::size_t leaf) {
  std::vector<std::size_t> chain;
  for (std::size_t i = leaf; i != 0; i = nodes[i].parent) chain.push_back(i);
  DerivationTrace trace;
  trace.start = cg.decode(nodes[0].form);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const auto& n = nodes[*it];
    trace.steps.push_back({cg.decode(nodes[n.parent].form), n.production, n.position, cg.decode(n.form)});
  }
  return trace;
}

/// Breadth-first closure over forms of length <= cap. `visit` sees each new
/// form once and returns true to stop the search.
template <class Prune, class Visit>
SearchStatus bounded_bfs(const CompiledGrammar& cg, std::size_t cap, std::size_t fuel, Prune&& prune, Visit&& visit,
                         std::vector<SearchNode>& nodes, std::size_t& expanded) {
  std::unordered_map<Form, std::size_t> seen;
  nodes.push_back({Form(1, cg.start()), 0, 0, 0});
  seen.emplace(nodes[0].form, 0);
  if (visit(std::size_t{0})) return SearchStatus::found;
  std::size_t head = 0;
  while (head < nodes.size()) {
    if (expanded >= fuel) return SearchStatus::fuel_exhausted;
    const std::size_t current = head++;
    ++expanded;
    bool stop = false;
    const Form form = nodes[current].form;  // nodes may reallocate below
    cg.for_each_redex(form, [&](std::size_t i, std::size_t pos) {
      if (stop) return;
      const auto& p = cg.productions()[i];
      const std::size_t len = form.size() - p.lhs.size() + p.rhs.size();
      if (len > cap) return;
      Form next = CompiledGrammar::rewrite(form, p, pos);
      if (prune(next)) return;
      auto [it, inserted] = seen.emplace(std::move(next), nodes.size());
      if (!inserted) return;
      nodes.push_back({it->first, current, i, pos});
      if (visit(nodes.size() - 1)) stop = true;
    });
    if (stop) return SearchStatus::found;
  }
  return SearchStatus::not_found;
}

}  // namespace detail

/// Bounded membership: searches forms no longer than the target (sound by
/// noncontraction) and returns a shortest derivation when one exists.
/// not_found is definitive; fuel_exhausted is indeterminate.
inline MembershipResult derives_bounded(const Grammar& g, std::span<const Symbol> target, SearchOptions options = {}) {
  detail::require_noncontracting(g);
  if (!is_all_terminal(target)) throw Error(ErrorCode::invalid_argument, "target must be a terminal string");
  const std::size_t cap = options.length_cap.value_or(target.size());
  if (cap < target.size()) throw Error(ErrorCode::invalid_argument, "length cap below target length");

  detail::CompiledGrammar cg(g);
  for (const auto& s : target)
    if (!cg.find_id(s)) return {};  // a foreign terminal: not in L(G)
  const detail::Form goal = cg.encode(target);

  detail::TargetPruner prune(cg, goal, options.prune);

  std::vector<detail::SearchNode> nodes;
  MembershipResult result;
  std::size_t hit = 0;
  auto visit = [&](std::size_t i) {
    if (nodes[i].form == goal) {
      hit = i;
      return true;
    }
    return false;
  };
  result.status = detail::bounded_bfs(cg, cap, options.fuel, prune, visit, nodes, result.expanded);
  if (result.status == SearchStatus::found) result.trace = detail::rebuild_trace(cg, nodes, hit);
  return result;
}

using Language = std::set<SymbolString, ShortlexLess>;

/// { w in V_T^{<=max_len} : start =>* w }. Throws FuelExhausted when more than
/// `fuel` forms would need expanding.
inline Language enumerate_language(const Grammar& g, std::size_t max_len, std::size_t fuel = default_fuel) {
  detail::require_noncontracting(g);
  detail::CompiledGrammar cg(g);
  std::vector<detail::SearchNode> nodes;
  Language out;
  std::size_t expanded = 0;
  auto visit = [&](std::size_t i) {
    if (cg.all_terminal(nodes[i].form)) out.insert(cg.decode(nodes[i].form));
    return false;
  };
  auto status = detail::bounded_bfs(cg, max_len, fuel, [](const detail::Form&) { return false; }, visit, nodes, expanded);
  if (status == SearchStatus::fuel_exhausted)
    throw Error(ErrorCode::fuel_exhausted, "enumeration needs more than " + std::to_string(fuel) + " expansions");
  return out;
}

}  // namespace lcsg
