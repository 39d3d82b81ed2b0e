#include <gtest/gtest.h>

#include "lcsg/csl_bridge.hpp"
#include "lcsg/grammar_io.hpp"
#include "lcsg/grammar_predictor.hpp"
#include "lcsg/induction.hpp"
#include "lcsg/ngram.hpp"
#include "lcsg/toy_attention.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace lcsg;

namespace {

GenerationRecord greedy_run(const Predictor& p, const SymbolString& prompt, std::size_t max_t = 32) {
  return generate(p, prompt, {DecodingPolicy::greedy, 0, max_t, std::nullopt});
}

std::set<SymbolString> as_set(const Language& l) { return {l.begin(), l.end()}; }

}  // namespace

TEST(Extract, PromptThenOneToken) {
  const auto p = ngram_train({terminal_string("a b")}, 1);
  const auto rec = greedy_run(p, terminal_string("a"));
  ASSERT_EQ(rec.final, terminal_string("a b"));
  const auto d = extract_productions(rec);
  ASSERT_EQ(d.productions.size(), 3u);
  const Symbol a0 = d.productions[0].rhs.back();
  const Symbol a1 = d.productions[1].rhs.back();
  EXPECT_EQ(d.productions[0].lhs, SymbolString{d.start});
  EXPECT_EQ(d.productions[0].rhs, (SymbolString{terminal("a"), a0}));
  EXPECT_EQ(d.productions[1].lhs, (SymbolString{terminal("a"), a0}));
  EXPECT_EQ(d.productions[1].rhs, (SymbolString{terminal("a"), terminal("b"), a1}));
  EXPECT_EQ(d.productions[2].lhs, SymbolString{a1});
  EXPECT_TRUE(d.productions[2].rhs.empty());
  EXPECT_EQ(d.productions[2].kind, DynamicProductionKind::terminal);
  EXPECT_TRUE(a0.name.starts_with("A#"));
  ASSERT_EQ(d.state_table.size(), 2u);
  EXPECT_EQ(d.state_table[0].second, rec.initial_state.encoding);
}

TEST(Extract, EmptyPrompt) {
  const auto p = ngram_train({terminal_string("a")}, 1);
  const auto rec = greedy_run(p, {});
  ASSERT_EQ(rec.final, terminal_string("a"));
  const auto d = extract_productions(rec);
  ASSERT_EQ(d.productions.size(), 3u);
  EXPECT_EQ(d.productions[0].rhs.size(), 1u);
  EXPECT_EQ(d.productions[1].lhs.size(), 1u);
  EXPECT_EQ(d.productions[1].rhs.size(), 2u);
}

TEST(Extract, CountAndStateIdentity) {
  const auto p = ngram_train({terminal_string("a b a b a")}, 1);
  const auto rec = generate(p, {}, {DecodingPolicy::sample, 3, 20, std::nullopt});
  const auto d = extract_productions(rec);
  EXPECT_EQ(d.productions.size(), rec.steps.size() + 2);
  // equal encodings, equal nonterminals
  for (std::size_t i = 0; i < d.nonterminals.size(); ++i)
    for (std::size_t j = 0; j < d.nonterminals.size(); ++j) {
      const Symbol si = i == 0 ? d.productions[0].rhs.back() : d.productions[i].rhs.back();
      const Symbol sj = j == 0 ? d.productions[0].rhs.back() : d.productions[j].rhs.back();
      EXPECT_EQ(d.nonterminals[i] == d.nonterminals[j], si == sj);
    }
}

TEST(Extract, RefusesSlidingWindow) {
  const auto p = ngram_train({terminal_string("a b a b")}, 1);
  const auto rec = generate(p, terminal_string("a"), {DecodingPolicy::greedy, 0, 4, 2});
  try {
    extract_productions(rec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::nonconforming_record);
  }
}

TEST(CheckForm, Examples) {
  const Symbol a0 = nonterminal("A0"), a1 = nonterminal("A1"), a = nonterminal("A");
  EXPECT_EQ(check_left_cs_form({DynamicProductionKind::interior, {terminal("a"), a0},
                                {terminal("a"), terminal("b"), a1}})
                .verdict,
            FormVerdict::pass);
  EXPECT_EQ(check_left_cs_form({DynamicProductionKind::terminal, {a1}, {}}).verdict, FormVerdict::exempt_terminal);
  const auto f = check_left_cs_form({DynamicProductionKind::interior, {terminal("a"), a}, {terminal("b"), a}});
  EXPECT_EQ(f.verdict, FormVerdict::fail);
  EXPECT_EQ(f.reason, "prefix changed");
}

TEST(Replay, Examples) {
  const auto p = ngram_train({terminal_string("a b")}, 1);
  const auto rec = greedy_run(p, terminal_string("a"));
  auto d = extract_productions(rec);
  EXPECT_EQ(replay(d.productions), terminal_string("a b"));

  const auto zero = greedy_run(p, terminal_string("a"), 0);
  EXPECT_EQ(replay(extract_productions(zero).productions), terminal_string("a"));

  d.productions[1].lhs[0] = terminal("b");
  d.productions[1].rhs[0] = terminal("b");
  try {
    replay(d.productions);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::replay_mismatch);
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(TraceReport, ConformingRun) {
  const auto p = ngram_train({terminal_string("a b c"), terminal_string("a c")}, 2);
  const auto r = make_trace_report(generate(p, terminal_string("a"), {DecodingPolicy::sample, 9, 10, std::nullopt}));
  EXPECT_TRUE(r.conforming);
  EXPECT_EQ(r.count(FormVerdict::exempt_terminal), 1u);
  EXPECT_EQ(r.count(FormVerdict::fail), 0u);
  EXPECT_EQ(r.replay_result, r.final);
}

TEST(Induce, BigramGrammar) {
  const auto p = ngram_train({terminal_string("a b a b")}, 1);
  const auto induced = induce_grammar(p, 8);
  EXPECT_FALSE(induced.truncated);
  std::set<std::string> names;
  for (const auto& n : induced.grammar.grammar().nonterminals) names.insert(n.name);
  EXPECT_EQ(names, (std::set<std::string>{"B", "s_BOS", "s_a", "s_b"}));
  EXPECT_TRUE(is_right_linear(induced.grammar.grammar()));
  EXPECT_EQ(classify_grammar(eliminate_lambda(induced.grammar).grammar()), ProductionClass::regular);

  // P(END | b) = 0.5, P(a | b) = 0.5, P(b | a) = 1, P(a | BOS) = 1
  const auto skeleton = eliminate_lambda(induced.grammar);
  EXPECT_NEAR(string_probability(skeleton, terminal_string("a b")), 0.5, 1e-12);
  EXPECT_NEAR(string_probability(skeleton, terminal_string("a b a b")), 0.25, 1e-12);
  EXPECT_EQ(string_probability(skeleton, terminal_string("a")), 0.0);
}

TEST(Induce, GrammarPredictorRoundTrip) {
  const WeightedGrammar wg(parse_grammar(oracle::read_data("left_cs_abc.grammar")));
  const auto induced = induce_grammar(GrammarPredictor(wg), 8);
  const auto skeleton = eliminate_lambda(induced.grammar);
  EXPECT_EQ(enumerate_language(skeleton.grammar(), 8), enumerate_language(wg.grammar(), 8));
  EXPECT_NEAR(string_probability(skeleton, terminal_string("a b c")), 1.0, 1e-12);
}

TEST(Induce, TruncationKeepsShortStringsExact) {
  const WeightedGrammar wg(parse_grammar("start: S\nnonterminals: S A\nterminals: a b\n"
                                         "S -> a A [p=1]\na A -> a b A [p=0.5] | a b [p=0.5]\n"
                                         "b A -> b a A [p=0.4] | b a [p=0.6]\n"));
  const GrammarPredictor p(wg);
  for (std::size_t depth : {2u, 3u, 5u}) {
    const auto induced = induce_grammar(p, depth);
    const auto skeleton = eliminate_lambda(induced.grammar);
    for (const auto& w : oracle::all_strings(wg.grammar().terminals, depth)) {
      if (w.empty()) continue;
      EXPECT_NEAR(string_probability(skeleton, w), string_probability(wg, w), 1e-12) << depth << ": " << to_string(w);
    }
  }
}

TEST(Induce, Errors) {
  const ToyAttentionPredictor toy(0, 4, Vocabulary(terminal_string("a b")));
  try {
    induce_grammar(toy, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsupported_infinite_state);
  }
  const auto p = ngram_train({terminal_string("a b c a c b")}, 2);
  try {
    induce_grammar(p, 8, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::state_budget_exceeded);
  }
}

TEST(Equivalence, Identity) {
  const Grammar g = parse_grammar(oracle::read_data("anbncn.grammar"));
  EXPECT_TRUE(check_weak_equivalence(g, g, 7).equivalent);
}

TEST(Equivalence, MonotoneAndLeftCsAnbncn) {
  const Grammar g1 = parse_grammar(oracle::read_data("anbncn.grammar"));
  const Grammar g2 = parse_grammar(oracle::read_data("anbncn_left.grammar"));
  EXPECT_EQ(classify_grammar(g2), ProductionClass::left_cs);
  const auto r = check_weak_equivalence(g1, g2, 6);
  EXPECT_TRUE(r.equivalent);
  EXPECT_EQ(as_set(enumerate_language(g2, 6)),
            (std::set<SymbolString>{terminal_string("a b c"), terminal_string("a a b b c c")}));
}

TEST(Equivalence, FirstDifferenceAtLengthFour) {
  const Grammar g1 = parse_grammar("start: S\nnonterminals: S\nterminals: a b\nS -> a b | b a b a | b b b b\n");
  const Grammar g2 = parse_grammar("start: S\nnonterminals: S\nterminals: a b\nS -> a b | b b b b\n");
  const auto r = check_weak_equivalence(g1, g2, 6);
  ASSERT_FALSE(r.equivalent);
  EXPECT_EQ(*r.counterexample, terminal_string("b a b a"));
  EXPECT_EQ(r.generated_by, 1);
  const auto s = check_weak_equivalence(g2, g1, 6);
  EXPECT_EQ(*s.counterexample, terminal_string("b a b a"));
  EXPECT_EQ(s.generated_by, 2);
  EXPECT_TRUE(check_weak_equivalence(g1, g2, 3).equivalent);
}

TEST(Equivalence, FuelAndAlphabet) {
  const Grammar g = parse_grammar(oracle::read_data("anbncn.grammar"));
  try {
    check_weak_equivalence(g, g, 9, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::fuel_exhausted);
  }
  const Grammar h = parse_grammar("start: S\nnonterminals: S\nterminals: a\nS -> a\n");
  EXPECT_THROW(check_weak_equivalence(g, h, 3), Error);
}
