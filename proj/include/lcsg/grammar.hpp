#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lcsg/symbol.hpp"

namespace lcsg {

/// A rewrite rule lhs -> rhs. `weight` is only meaningful for stochastic use;
/// an absent weight means 1.0.
struct Production {
  SymbolString lhs;
  SymbolString rhs;
  std::optional<double> weight;

  double weight_or_default() const noexcept { return weight.value_or(1.0); }

  friend bool operator==(const Production&, const Production&) = default;
};

/// (V_N, V_T, start, P). Alphabets keep declaration order; production order is
/// the deterministic tie-break for every search in the library.
struct Grammar {
  std::vector<Symbol> nonterminals;
  std::vector<Symbol> terminals;
  Symbol start;
  std::vector<Production> productions;

  bool declares(const Symbol& s) const {
    const auto& pool = s.is_terminal() ? terminals : nonterminals;
    return std::find(pool.begin(), pool.end(), s) != pool.end();
  }

  friend bool operator==(const Grammar&, const Grammar&) = default;
};

inline bool start_on_some_rhs(const Grammar& g) {
  for (const auto& p : g.productions)
    if (std::find(p.rhs.begin(), p.rhs.end(), g.start) != p.rhs.end()) return true;
  return false;
}

/// True for the single permitted lambda rule: start -> lambda with the start
/// symbol on no right-hand side.
inline bool is_permitted_lambda(const Grammar& g, const Production& p) {
  return p.rhs.empty() && p.lhs.size() == 1 && p.lhs.front() == g.start && !start_on_some_rhs(g);
}

struct ValidationReport {
  std::vector<std::string> violations;
  bool noncontracting = false;

  bool ok() const noexcept { return violations.empty(); }
};

inline ValidationReport validate_grammar(const Grammar& g) {
  ValidationReport report;
  auto& v = report.violations;

  std::map<std::string, int> seen;  // name -> bitmask of kinds
  auto declare = [&](const Symbol& s, SymbolKind expected) {
    if (auto problem = symbol_name_problem(s.name); !problem.empty())
      v.push_back("invalid symbol '" + s.name + "': " + problem);
    if (s.kind != expected)
      v.push_back("symbol '" + s.name + "' declared with the wrong kind");
    int bit = expected == SymbolKind::terminal ? 1 : 2;
    int& mask = seen[s.name];
    if (mask & bit) v.push_back("symbol '" + s.name + "' declared twice");
    mask |= bit;
  };
  for (const auto& s : g.nonterminals) declare(s, SymbolKind::nonterminal);
  for (const auto& s : g.terminals) declare(s, SymbolKind::terminal);
  for (const auto& [name, mask] : seen)
    if (mask == 3) v.push_back("symbol '" + name + "' is in both V_N and V_T");

  if (!g.start.is_nonterminal() || !g.declares(g.start)) v.push_back("start not in V_N");

  bool noncontracting = true;
  for (std::size_t i = 0; i < g.productions.size(); ++i) {
    const auto& p = g.productions[i];
    const std::string where = "production " + std::to_string(i) + ": ";
    if (p.lhs.empty()) v.push_back(where + "empty lhs");
    else if (!has_nonterminal(p.lhs)) v.push_back(where + "lhs contains no nonterminal");
    for (const auto* side : {&p.lhs, &p.rhs})
      for (const auto& s : *side)
        if (!g.declares(s)) v.push_back(where + "undeclared symbol '" + s.name + "'");
    if (p.weight && (!std::isfinite(*p.weight) || *p.weight < 0.0))
      v.push_back(where + "weight must be finite and non-negative");
    if (p.rhs.size() < p.lhs.size() && !is_permitted_lambda(g, p)) noncontracting = false;
  }
  report.noncontracting = noncontracting;
  return report;
}

enum class ProductionClass : std::uint8_t {
  regular,
  context_free,
  left_cs,
  strict_cs,
  monotone,
  unrestricted,
};

inline constexpr std::array<ProductionClass, 6> all_production_classes = {
    ProductionClass::regular,  ProductionClass::context_free, ProductionClass::left_cs,
    ProductionClass::strict_cs, ProductionClass::monotone,    ProductionClass::unrestricted,
};

inline std::string_view to_string(ProductionClass c) {
  switch (c) {
    case ProductionClass::regular: return "REGULAR";
    case ProductionClass::context_free: return "CONTEXT_FREE";
    case ProductionClass::left_cs: return "LEFT_CS";
    case ProductionClass::strict_cs: return "STRICT_CS";
    case ProductionClass::monotone: return "MONOTONE";
    case ProductionClass::unrestricted: return "UNRESTRICTED";
  }
  return "?";
}

inline std::optional<ProductionClass> production_class_from_string(std::string_view s) {
  for (auto c : all_production_classes)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

/// The set of classes one production satisfies.
class ProductionClassSet {
 public:
  void insert(ProductionClass c) noexcept { bits_ |= bit(c); }
  bool contains(ProductionClass c) const noexcept { return (bits_ & bit(c)) != 0; }
  bool empty() const noexcept { return bits_ == 0; }

  ProductionClassSet intersect(ProductionClassSet other) const noexcept {
    ProductionClassSet r;
    r.bits_ = bits_ & other.bits_;
    return r;
  }

  static ProductionClassSet all() noexcept {
    ProductionClassSet r;
    for (auto c : all_production_classes) r.insert(c);
    return r;
  }

  std::string to_string() const {
    std::string out;
    for (auto c : all_production_classes)
      if (contains(c)) {
        if (!out.empty()) out += ',';
        out += lcsg::to_string(c);
      }
    return out;
  }

  friend bool operator==(const ProductionClassSet&, const ProductionClassSet&) = default;

 private:
  static std::uint8_t bit(ProductionClass c) noexcept { return std::uint8_t(1u << unsigned(c)); }
  std::uint8_t bits_ = 0;
};

/// Decomposition lhs = alpha A, rhs = alpha R with R non-empty. Since A must be
/// the last lhs symbol there is at most one.
struct LeftCsSplit {
  std::size_t alpha_length;
};

inline std::optional<LeftCsSplit> left_cs_split(std::span<const Symbol> lhs, std::span<const Symbol> rhs) {
  if (lhs.empty() || !lhs.back().is_nonterminal()) return std::nullopt;
  const std::size_t alpha = lhs.size() - 1;
  if (rhs.size() <= alpha) return std::nullopt;
  if (!std::equal(lhs.begin(), lhs.begin() + alpha, rhs.begin())) return std::nullopt;
  return LeftCsSplit{alpha};
}

/// Some decomposition lhs = alpha A beta, rhs = alpha R beta with R non-empty.
inline bool has_strict_cs_split(std::span<const Symbol> lhs, std::span<const Symbol> rhs) {
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (!lhs[i].is_nonterminal()) continue;
    const std::size_t alpha = i, beta = lhs.size() - i - 1;
    if (rhs.size() < alpha + beta + 1) continue;
    if (!std::equal(lhs.begin(), lhs.begin() + alpha, rhs.begin())) continue;
    if (!std::equal(lhs.end() - beta, lhs.end(), rhs.end() - beta)) continue;
    return true;
  }
  return false;
}

inline ProductionClassSet classify_production(const Production& p) {
  ProductionClassSet out;
  out.insert(ProductionClass::unrestricted);
  const bool single_nt = p.lhs.size() == 1 && p.lhs.front().is_nonterminal();
  // Context-free here means lambda-free context-free: A -> beta with beta
  // non-empty. The start -> lambda exception is handled at grammar level.
  if (single_nt && !p.rhs.empty()) {
    out.insert(ProductionClass::context_free);
    const bool a = p.rhs.size() == 1 && p.rhs[0].is_terminal();
    const bool a_b = p.rhs.size() == 2 && p.rhs[0].is_terminal() && p.rhs[1].is_nonterminal();
    if (a || a_b) out.insert(ProductionClass::regular);
  }
  if (left_cs_split(p.lhs, p.rhs)) out.insert(ProductionClass::left_cs);
  if (has_strict_cs_split(p.lhs, p.rhs)) out.insert(ProductionClass::strict_cs);
  if (p.rhs.size() >= p.lhs.size()) out.insert(ProductionClass::monotone);
  return out;
}

/// Tightest class, in the order REGULAR, CONTEXT_FREE, LEFT_CS, STRICT_CS,
/// MONOTONE, UNRESTRICTED, that every production satisfies. The permitted
/// start -> lambda rule is compatible with every class.
inline ProductionClass classify_grammar(const Grammar& g) {
  auto joint = ProductionClassSet::all();
  for (const auto& p : g.productions) {
    if (is_permitted_lambda(g, p)) continue;
    joint = joint.intersect(classify_production(p));
  }
  for (auto c : all_production_classes)
    if (joint.contains(c)) return c;
  return ProductionClass::unrestricted;
}

/// Every production is A -> w or A -> w B with w a (possibly empty) terminal string.
inline bool is_right_linear(const Grammar& g) {
  for (const auto& p : g.productions) {
    if (p.lhs.size() != 1 || !p.lhs.front().is_nonterminal()) return false;
    for (std::size_t i = 0; i < p.rhs.size(); ++i) {
      const bool last = i + 1 == p.rhs.size();
      if (p.rhs[i].is_nonterminal() && !last) return false;
    }
  }
  return true;
}

}  // namespace lcsg
