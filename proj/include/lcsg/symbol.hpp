#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcsg/error.hpp"

namespace lcsg {

enum class SymbolKind { terminal, nonterminal };

/// A grammar symbol. Names are whitespace-free identifiers and may be longer
/// than one character (tokens are whitespace separated everywhere).
struct Symbol {
  std::string name;
  SymbolKind kind = SymbolKind::terminal;

  bool is_terminal() const noexcept { return kind == SymbolKind::terminal; }
  bool is_nonterminal() const noexcept { return kind == SymbolKind::nonterminal; }

  friend bool operator==(const Symbol&, const Symbol&) = default;
  friend std::strong_ordering operator<=>(const Symbol& a, const Symbol& b) {
    if (auto c = a.name <=> b.name; c != 0) return c;
    return a.kind <=> b.kind;
  }
};

inline Symbol terminal(std::string name) { return {std::move(name), SymbolKind::terminal}; }
inline Symbol nonterminal(std::string name) { return {std::move(name), SymbolKind::nonterminal}; }

/// An ordered string of symbols; the empty string is lambda.
using SymbolString = std::vector<Symbol>;

/// Placeholder used for lambda in every text format.
inline constexpr std::string_view lambda_token = "_";

inline bool is_all_terminal(std::span<const Symbol> s) {
  return std::all_of(s.begin(), s.end(), [](const Symbol& x) { return x.is_terminal(); });
}

inline bool has_nonterminal(std::span<const Symbol> s) { return !is_all_terminal(s); }

/// Reasons a name cannot be a symbol, or empty when it can.
inline std::string symbol_name_problem(std::string_view name) {
  if (name.empty()) return "empty symbol name";
  if (name == "->" || name == "|" || name == lambda_token) return "reserved token '" + std::string(name) + "'";
  if (name.front() == '#' || name.front() == '[') return "symbol may not start with '" + std::string(1, name.front()) + "'";
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c))) return "symbol contains whitespace";
    if (c == '=') return "symbol contains '='";
  }
  if (name.back() == ':') return "symbol may not end with ':'";
  return {};
}

inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

/// Whitespace-tokenized terminal string. A lone "_" denotes lambda.
inline SymbolString terminal_string(std::string_view text) {
  SymbolString out;
  for (auto& w : split_whitespace(text)) {
    if (w == lambda_token) continue;
    out.push_back(terminal(std::move(w)));
  }
  return out;
}

/// Space-joined names; lambda renders as "_".
inline std::string to_string(std::span<const Symbol> s) {
  if (s.empty()) return std::string(lambda_token);
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += s[i].name;
  }
  return out;
}

/// Length-then-lexicographic order on names; the order used to pick
/// "smallest" strings in reports.
inline bool shortlex_less(std::span<const Symbol> a, std::span<const Symbol> b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](const Symbol& x, const Symbol& y) { return x.name < y.name; });
}

struct ShortlexLess {
  bool operator()(const SymbolString& a, const SymbolString& b) const { return shortlex_less(a, b); }
};

}  // namespace lcsg
