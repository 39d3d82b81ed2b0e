#pragma once

// Grammar file format (UTF-8, line oriented):
//
//   # comment                       (a token starting with '#' ends the line)
//   start: S
//   nonterminals: S B C
//   terminals: a b c
//   S -> a S B C [p=0.5] | a B C    (alternatives separated by '|')
//   S -> _                          ('_' is lambda)
//
// Declarations may appear in any order relative to productions.

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "lcsg/grammar.hpp"

namespace lcsg {

namespace detail {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize_line(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) {
      if (line[i] == '#') break;
      out.push_back({std::string(line.substr(i, j - i)), i + 1});
    }
    i = j;
  }
  return out;
}

/// Shortest decimal text that reads back to exactly `x`.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct RawSymbol {
  std::string name;
  std::size_t line, column;
};

struct RawAlternative {
  std::vector<RawSymbol> rhs;
  std::optional<double> weight;
};

struct RawRule {
  std::vector<RawSymbol> lhs;
  std::vector<RawAlternative> alternatives;
};

}  // namespace detail

inline Grammar parse_grammar(std::string_view text) {
  using detail::RawSymbol;
  std::vector<RawSymbol> nts, ts;
  std::optional<RawSymbol> start;
  std::vector<detail::RawRule> rules;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    auto toks = detail::tokenize_line(line);
    if (toks.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto& head = toks.front().text;
    if (head == "start:" || head == "terminals:" || head == "nonterminals:") {
      if (head == "start:") {
        if (start) throw Error::at(ErrorCode::syntax, "duplicate start declaration", line_no, toks[0].column);
        if (toks.size() != 2)
          throw Error::at(ErrorCode::syntax, "start: takes exactly one symbol", line_no, toks[0].column);
        start = RawSymbol{toks[1].text, line_no, toks[1].column};
      } else {
        auto& pool = head == "terminals:" ? ts : nts;
        for (std::size_t i = 1; i < toks.size(); ++i) {
          if (auto problem = symbol_name_problem(toks[i].text); !problem.empty())
            throw Error::at(ErrorCode::syntax, problem, line_no, toks[i].column);
          pool.push_back({toks[i].text, line_no, toks[i].column});
        }
      }
    } else {
      detail::RawRule rule;
      std::size_t i = 0;
      for (; i < toks.size() && toks[i].text != "->"; ++i) {
        if (auto problem = symbol_name_problem(toks[i].text); !problem.empty())
          throw Error::at(ErrorCode::syntax, problem, line_no, toks[i].column);
        rule.lhs.push_back({toks[i].text, line_no, toks[i].column});
      }
      if (i == toks.size()) throw Error::at(ErrorCode::syntax, "expected '->'", line_no, toks.back().column);
      if (rule.lhs.empty()) throw Error::at(ErrorCode::syntax, "empty lhs", line_no, toks[i].column);
      const std::size_t arrow_col = toks[i].column;
      ++i;
      detail::RawAlternative alt;
      bool saw_lambda = false, saw_weight = false, any = false;
      auto close = [&](std::size_t col) {
        if (!any) throw Error::at(ErrorCode::syntax, "empty alternative (write '_' for lambda)", line_no, col);
        rule.alternatives.push_back(std::move(alt));
        alt = {};
        saw_lambda = saw_weight = any = false;
      };
      std::size_t last_col = arrow_col;
      for (; i < toks.size(); ++i) {
        const auto& t = toks[i];
        last_col = t.column;
        if (t.text == "|") {
          close(t.column);
          continue;
        }
        if (saw_weight) throw Error::at(ErrorCode::syntax, "weight must end the alternative", line_no, t.column);
        if (t.text.starts_with("[p=") && t.text.ends_with("]")) {
          auto w = detail::parse_double(std::string_view(t.text).substr(3, t.text.size() - 4));
          if (!w || !std::isfinite(*w) || *w < 0.0)
            throw Error::at(ErrorCode::syntax, "bad weight '" + t.text + "'", line_no, t.column);
          if (!any) throw Error::at(ErrorCode::syntax, "weight without symbols", line_no, t.column);
          alt.weight = *w;
          saw_weight = true;
          continue;
        }
        if (t.text == lambda_token) {
          if (any) throw Error::at(ErrorCode::syntax, "'_' must stand alone", line_no, t.column);
          saw_lambda = any = true;
          continue;
        }
        if (saw_lambda) throw Error::at(ErrorCode::syntax, "'_' must stand alone", line_no, t.column);
        if (auto problem = symbol_name_problem(t.text); !problem.empty())
          throw Error::at(ErrorCode::syntax, problem, line_no, t.column);
        alt.rhs.push_back({t.text, line_no, t.column});
        any = true;
      }
      close(last_col);
      rules.push_back(std::move(rule));
    }
    if (end == text.size()) break;
  }

  Grammar g;
  std::unordered_map<std::string, SymbolKind> kinds;
  auto declare = [&](const RawSymbol& s, SymbolKind kind) {
    if (auto it = kinds.find(s.name); it != kinds.end())
      throw Error::at(ErrorCode::duplicate_symbol,
                      it->second == kind ? "symbol '" + s.name + "' declared twice"
                                         : "symbol '" + s.name + "' declared as both terminal and nonterminal",
                      s.line, s.column);
    kinds.emplace(s.name, kind);
    (kind == SymbolKind::terminal ? g.terminals : g.nonterminals).push_back({s.name, kind});
  };
  for (const auto& s : nts) declare(s, SymbolKind::nonterminal);
  for (const auto& s : ts) declare(s, SymbolKind::terminal);

  if (!start) throw Error(ErrorCode::missing_start, "no 'start:' declaration");
  if (auto it = kinds.find(start->name); it == kinds.end() || it->second != SymbolKind::nonterminal)
    throw Error::at(ErrorCode::undeclared_symbol, "start symbol '" + start->name + "' is not a declared nonterminal",
                    start->line, start->column);
  g.start = nonterminal(start->name);

  auto resolve = [&](const RawSymbol& s) {
    auto it = kinds.find(s.name);
    if (it == kinds.end())
      throw Error::at(ErrorCode::undeclared_symbol, "undeclared symbol '" + s.name + "'", s.line, s.column);
    return Symbol{s.name, it->second};
  };
  for (const auto& rule : rules) {
    SymbolString lhs;
    for (const auto& s : rule.lhs) lhs.push_back(resolve(s));
    if (!has_nonterminal(lhs))
      throw Error::at(ErrorCode::invalid_grammar, "lhs contains no nonterminal", rule.lhs[0].line,
                      rule.lhs[0].column);
    for (const auto& alt : rule.alternatives) {
      Production p{lhs, {}, alt.weight};
      for (const auto& s : alt.rhs) p.rhs.push_back(resolve(s));
      g.productions.push_back(std::move(p));
    }
  }
  return g;
}

/// Canonical text: header lines then one production per line, file order kept.
/// parse_grammar(render_grammar(g)) == g for every valid grammar.
inline std::string render_grammar(const Grammar& g) {
  std::ostringstream out;
  out << "start: " << g.start.name << '\n';
  out << "nonterminals:";
  for (const auto& s : g.nonterminals) out << ' ' << s.name;
  out << "\nterminals:";
  for (const auto& s : g.terminals) out << ' ' << s.name;
  out << '\n';
  for (const auto& p : g.productions) {
    out << to_string(p.lhs) << " -> " << to_string(p.rhs);
    if (p.weight) out << " [p=" << detail::format_double(*p.weight) << ']';
    out << '\n';
  }
  return out.str();
}

}  // namespace lcsg
