#include <gtest/gtest.h>

#include "lcsg/derivation.hpp"
#include "lcsg/grammar_io.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace lcsg;

namespace {

const Grammar& anbncn() {
  static const Grammar g = parse_grammar(oracle::read_data("anbncn.grammar"));
  return g;
}

SymbolString form(const Grammar& g, std::string_view text) {
  SymbolString out;
  for (auto& w : split_whitespace(text)) out.push_back(g.declares(terminal(w)) ? terminal(w) : nonterminal(w));
  return out;
}

std::set<SymbolString> as_set(const Language& l) { return {l.begin(), l.end()}; }

}  // namespace

TEST(ApplyStep, Substitutes) {
  const auto& g = anbncn();
  EXPECT_EQ(apply_step(form(g, "a S B C"), g.productions[0], 1), form(g, "a a S B C B C"));
  EXPECT_EQ(apply_step(form(g, "a a B C B C"), g.productions[2], 3), form(g, "a a B B C C"));
}

TEST(ApplyStep, Errors) {
  const auto& g = anbncn();
  try {
    apply_step(form(g, "a B C"), g.productions[2], 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_match);
  }
  try {
    apply_step(form(g, "a B C"), g.productions[2], 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::out_of_range);
  }
}

TEST(Successors, Examples) {
  const auto& g = anbncn();
  const auto s = successors(form(g, "S"), g);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].production_index, 0u);
  EXPECT_EQ(s[1].production_index, 1u);
  EXPECT_TRUE(successors(form(g, "a b c"), g).empty());
  const auto t = successors(form(g, "a B C"), g);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].production_index, 3u);
  EXPECT_EQ(t[0].position, 0u);
}

TEST(DerivesBounded, Abc) {
  const auto r = derives_bounded(anbncn(), terminal_string("a b c"));
  ASSERT_EQ(r.status, SearchStatus::found);
  ASSERT_EQ(r.trace->steps.size(), 3u);
  const auto& g = anbncn();
  EXPECT_EQ(r.trace->steps[0].after, form(g, "a B C"));
  EXPECT_EQ(r.trace->steps[1].after, form(g, "a b C"));
  EXPECT_EQ(r.trace->steps[2].after, form(g, "a b c"));
}

TEST(DerivesBounded, NegativeAndLonger) {
  EXPECT_EQ(derives_bounded(anbncn(), terminal_string("a b")).status, SearchStatus::not_found);
  const auto r = derives_bounded(anbncn(), terminal_string("a a b b c c"));
  ASSERT_EQ(r.status, SearchStatus::found);
  EXPECT_EQ(r.trace->result(), terminal_string("a a b b c c"));
  EXPECT_EQ(derives_bounded(anbncn(), terminal_string("a x c")).status, SearchStatus::not_found);
}

TEST(DerivesBounded, FuelExhaustionIsDistinct) {
  const auto r = derives_bounded(anbncn(), terminal_string("a a a b b b c c c"), {3, true, std::nullopt});
  EXPECT_EQ(r.status, SearchStatus::fuel_exhausted);
  EXPECT_FALSE(r.trace.has_value());
}

TEST(DerivesBounded, RejectsContractingGrammar) {
  const Grammar g = parse_grammar("start: S\nnonterminals: S A B\nterminals: a\nS -> A B\nA B -> a\n");
  try {
    derives_bounded(g, terminal_string("a"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_noncontracting);
  }
}

TEST(DerivesBounded, StartLambda) {
  const Grammar g = parse_grammar("start: S\nnonterminals: S A\nterminals: a\nS -> _ | a A\nA -> a\n");
  EXPECT_EQ(derives_bounded(g, SymbolString{}).status, SearchStatus::found);
  EXPECT_EQ(derives_bounded(anbncn(), SymbolString{}).status, SearchStatus::not_found);
}

TEST(EnumerateLanguage, Examples) {
  EXPECT_EQ(as_set(enumerate_language(anbncn(), 6)),
            (std::set<SymbolString>{terminal_string("a b c"), terminal_string("a a b b c c")}));
  EXPECT_EQ(as_set(enumerate_language(parse_grammar(oracle::read_data("left_cs_abc.grammar")), 5)),
            (std::set<SymbolString>{terminal_string("a b c")}));
  const Grammar stuck = parse_grammar("start: S\nnonterminals: S\nterminals: a\nS -> a S\n");
  EXPECT_TRUE(enumerate_language(stuck, 8).empty());
}

TEST(EnumerateLanguage, FuelExhausted) {
  try {
    enumerate_language(anbncn(), 9, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::fuel_exhausted);
  }
}

TEST(EnumerateLanguage, CrossSerialMatchesItsDefinition) {
  const Grammar g = parse_grammar(oracle::read_data("cross_serial.grammar"));
  std::set<SymbolString> expected;
  for (int m = 1; m <= 4; ++m)
    for (int n = 1; 2 * (m + n) <= 9; ++n) {
      SymbolString w;
      for (const char* t : {"a", "b", "c", "d"}) {
        const int reps = (*t == 'a' || *t == 'c') ? m : n;
        for (int i = 0; i < reps; ++i) w.push_back(terminal(t));
      }
      expected.insert(w);
    }
  EXPECT_EQ(expected.size(), 6u);
  EXPECT_EQ(as_set(enumerate_language(g, 9)), expected);
}

TEST(EnumerateLanguage, MatchesNaiveOracleOnFixtures) {
  for (const char* name : {"anbncn.grammar", "cross_serial.grammar", "anbncn_left.grammar", "left_cs_abc.grammar"}) {
    const Grammar g = parse_grammar(oracle::read_data(name));
    EXPECT_EQ(as_set(enumerate_language(g, 7)), oracle::language(g, 7)) << name;
  }
}

TEST(DerivesBounded, AgreesWithEnumerationOnAllShortStrings) {
  const Grammar g = parse_grammar(oracle::read_data("cross_serial.grammar"));
  const auto lang = oracle::language(g, 6);
  for (const auto& w : oracle::all_strings(g.terminals, 6)) {
    const auto r = derives_bounded(g, w);
    ASSERT_NE(r.status, SearchStatus::fuel_exhausted);
    EXPECT_EQ(r.status == SearchStatus::found, lang.contains(w)) << to_string(w);
  }
}

TEST(DerivesBounded, TracesAreSoundAndMonotone) {
  const auto& g = anbncn();
  const auto r = derives_bounded(g, terminal_string("a a a b b b c c c"));
  ASSERT_EQ(r.status, SearchStatus::found);
  EXPECT_EQ(r.trace->start, SymbolString{g.start});
  SymbolString cur = r.trace->start;
  for (const auto& s : r.trace->steps) {
    EXPECT_EQ(s.before, cur);
    EXPECT_EQ(apply_step(s.before, g.productions[s.production_index], s.position), s.after);
    EXPECT_GE(s.after.size(), s.before.size());
    cur = s.after;
  }
}

TEST(DerivesBounded, ShortestWitness) {
  // BFS returns a derivation no longer than any other; the oracle gives the
  // shortest distance by plain BFS over forms.
  const auto& g = anbncn();
  const SymbolString target = terminal_string("a a b b c c");
  std::map<SymbolString, std::size_t> dist{{{g.start}, 0}};
  std::vector<SymbolString> frontier{{g.start}};
  while (!frontier.empty() && !dist.contains(target)) {
    std::vector<SymbolString> next;
    for (const auto& w : frontier)
      for (auto& v : oracle::rewrites(w, g))
        if (v.size() <= target.size() && !dist.contains(v)) {
          dist[v] = dist[w] + 1;
          next.push_back(v);
        }
    frontier = std::move(next);
  }
  const auto r = derives_bounded(g, target);
  ASSERT_EQ(r.status, SearchStatus::found);
  EXPECT_EQ(r.trace->steps.size(), dist.at(target));
}
