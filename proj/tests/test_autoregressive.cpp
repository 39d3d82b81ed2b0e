#include <gtest/gtest.h>

#include "lcsg/autoregressive.hpp"
#include "lcsg/grammar_io.hpp"
#include "lcsg/grammar_predictor.hpp"
#include "lcsg/ngram.hpp"
#include "lcsg/toy_attention.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace lcsg;

namespace {

/// Returns the same distribution in every state.
class FixedPredictor final : public Predictor {
 public:
  FixedPredictor(std::vector<std::string> tokens, std::vector<double> probs) : dist_(std::move(probs)) {
    for (auto& t : tokens) vocab_.add(terminal(t));
  }
  PredictorFamily family() const override { return PredictorFamily::ngram; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  bool finite_state() const override { return true; }
  PredictorState initial_state(std::span<const Symbol>) const override { return {PredictorFamily::ngram, "fixed"}; }
  Prediction next_distribution(const PredictorState& s, std::span<const Symbol> context) const override {
    check_context(context);
    return {dist_, std::vector<std::optional<PredictorState>>(vocab_.size(), s)};
  }

 private:
  Vocabulary vocab_;
  TokenDistribution dist_;
};

GrammarPredictor grammar_from(const std::string& text) { return GrammarPredictor(WeightedGrammar(parse_grammar(text))); }

GrammarPredictor grammar_file(const char* name) { return grammar_from(oracle::read_data(name)); }

const char* geometric_text = "start: S\nnonterminals: S\nterminals: a\nS -> a S [p=0.3] | a [p=0.7]\n";

}  // namespace

TEST(TokenDistribution, Validation) {
  EXPECT_NO_THROW(TokenDistribution({0.25, 0.75}));
  EXPECT_THROW(TokenDistribution({0.5, 0.6}), Error);
  EXPECT_THROW(TokenDistribution({-0.1, 1.1}), Error);
}

TEST(StepNtp, GreedyTieBreakAndArgmax) {
  Rng rng(0);
  const FixedPredictor tie({"a", "b"}, {0.5, 0.5, 0.0});
  Configuration c{{}, tie.initial_state({}), 0};
  EXPECT_EQ(step_ntp(c, tie, DecodingPolicy::greedy, rng).pending_token, terminal("a"));

  const FixedPredictor end_only({"a"}, {0.0, 1.0});
  EXPECT_TRUE(step_ntp(c, end_only, DecodingPolicy::greedy, rng).is_end());

  const FixedPredictor skew({"a", "b"}, {0.2, 0.8, 0.0});
  EXPECT_EQ(step_ntp(c, skew, DecodingPolicy::greedy, rng).pending_token, terminal("b"));

  const FixedPredictor end_tie({"a"}, {0.5, 0.5});
  EXPECT_EQ(step_ntp(c, end_tie, DecodingPolicy::greedy, rng).pending_token, terminal("a"));
}

TEST(StepNtp, ContextUnchanged) {
  Rng rng(0);
  const FixedPredictor p({"a", "b"}, {0.5, 0.5, 0.0});
  Configuration c{terminal_string("a b"), p.initial_state({}), 2};
  const auto ic = step_ntp(c, p, DecodingPolicy::sample, rng);
  EXPECT_EQ(ic.context, c.context);
  EXPECT_EQ(ic.t, 2u);
}

TEST(StepNtp, UnknownToken) {
  Rng rng(0);
  const FixedPredictor p({"a"}, {0.5, 0.5});
  Configuration c{terminal_string("z"), p.initial_state({}), 1};
  try {
    step_ntp(c, p, DecodingPolicy::greedy, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_token);
  }
}

TEST(StepCwu, Appends) {
  const PredictorState s{PredictorFamily::ngram, "s1"};
  const auto c = step_cwu({terminal_string("a b"), terminal("c"), s, 2});
  EXPECT_EQ(c.context, terminal_string("a b c"));
  EXPECT_EQ(c.state, s);
  EXPECT_EQ(c.t, 3u);
  EXPECT_EQ(step_cwu({{}, terminal("a"), s, 0}).context, terminal_string("a"));
  try {
    step_cwu({terminal_string("a"), std::nullopt, s, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::end_token);
  }
}

TEST(GrammarPredictor, GeometricConditionals) {
  const auto p = grammar_from(geometric_text);
  auto state = p.initial_state({});
  auto d0 = p.next_distribution(state, {});
  EXPECT_NEAR(d0.distribution.token(0), 1.0, 1e-12);
  EXPECT_NEAR(d0.distribution.end(), 0.0, 1e-12);
  const SymbolString a = terminal_string("a");
  auto d1 = p.next_distribution(*d0.successors[0], a);
  EXPECT_NEAR(d1.distribution.token(0), 0.3, 1e-12);
  EXPECT_NEAR(d1.distribution.end(), 0.7, 1e-12);
}

TEST(GrammarPredictor, DeterministicChainIsPointMass) {
  const auto p = grammar_file("left_cs_abc.grammar");
  auto state = p.initial_state({});
  SymbolString ctx;
  for (int i = 0; i < 4; ++i) {
    const auto d = p.next_distribution(state, ctx);
    double top = 0;
    for (double v : d.distribution.values()) top = std::max(top, v);
    EXPECT_NEAR(top, 1.0, 1e-12);
    const std::size_t k = greedy_choice(d.distribution);
    if (k == d.distribution.end_index()) break;
    ctx.push_back(p.vocabulary()[k]);
    state = *d.successors[k];
  }
  EXPECT_EQ(ctx, terminal_string("a b c"));
}

TEST(GrammarPredictor, NotLeftLinearizable) {
  try {
    grammar_from("start: S\nnonterminals: S\nterminals: a b\nS -> a S b | a b\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_left_linearizable);
    EXPECT_EQ(e.index(), 0u);
  }
}

TEST(GrammarPredictor, RejectsNonLeftCsGrammar) {
  try {
    grammar_file("anbncn.grammar");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(GrammarPredictor, ChainedProbabilitiesMatchStringProbability) {
  Rng rng(5);
  for (int i = 0; i < 25; ++i) {
    const WeightedGrammar wg(gen::left_linear_grammar(rng));
    const GrammarPredictor p(wg);
    for (const auto& w : oracle::all_strings(wg.grammar().terminals, 5)) {
      if (w.empty()) continue;
      EXPECT_NEAR(oracle::chained_probability(p, w), string_probability(wg, w), 1e-9)
          << render_grammar(wg.grammar()) << to_string(w);
    }
  }
}

TEST(Generate, LeftCsContinuation) {
  const auto p = grammar_file("left_cs_abc.grammar");
  const auto rec = generate(p, terminal_string("a"), {DecodingPolicy::greedy, 0, 32, std::nullopt});
  EXPECT_EQ(rec.final, terminal_string("a b c"));
  EXPECT_EQ(rec.termination, Termination::end_sampled);
  EXPECT_EQ(rec.steps.size(), 2u);
}

TEST(Generate, MaxTZero) {
  const auto p = grammar_from(geometric_text);
  const auto rec = generate(p, terminal_string("a"), {DecodingPolicy::sample, 1, 0, std::nullopt});
  EXPECT_EQ(rec.final, terminal_string("a"));
  EXPECT_TRUE(rec.steps.empty());
  EXPECT_EQ(rec.termination, Termination::max_t_reached);
}

TEST(Generate, Deterministic) {
  const auto p = grammar_from(geometric_text);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GenerationOptions o{DecodingPolicy::sample, seed, 16, std::nullopt};
    EXPECT_EQ(generate(p, {}, o), generate(p, {}, o));
  }
}

TEST(Generate, SlidingWindowIsNonconforming) {
  const auto p = ngram_train({terminal_string("a b a b")}, 1);
  const auto rec = generate(p, terminal_string("a"), {DecodingPolicy::greedy, 0, 6, 2});
  EXPECT_FALSE(rec.conforming());
  EXPECT_EQ(rec.final.size(), rec.prompt.size() + rec.steps.size());
}

TEST(Ngram, BigramCounts) {
  const auto p = ngram_train({terminal_string("a b a b")}, 1);
  const auto& v = p.vocabulary();
  ASSERT_EQ(v.size(), 2u);
  auto da = p.next_distribution(p.initial_state(terminal_string("a")), terminal_string("a"));
  EXPECT_NEAR(da.distribution.token(*v.find(terminal("b"))), 1.0, 1e-12);
  auto db = p.next_distribution(p.initial_state(terminal_string("a b")), terminal_string("a b"));
  EXPECT_NEAR(db.distribution.token(*v.find(terminal("a"))), 0.5, 1e-12);
  EXPECT_NEAR(db.distribution.end(), 0.5, 1e-12);
}

TEST(Ngram, UnigramAndUnseen) {
  const auto uni = ngram_train({terminal_string("a a b")}, 0);
  const auto d = uni.next_distribution(uni.initial_state({}), {});
  EXPECT_NEAR(d.distribution.token(0), 0.5, 1e-12);
  EXPECT_NEAR(d.distribution.token(1), 0.25, 1e-12);
  EXPECT_NEAR(d.distribution.end(), 0.25, 1e-12);

  const auto tri = ngram_train({terminal_string("a b"), terminal_string("c")}, 2);
  const SymbolString ctx = terminal_string("c c");
  const auto u = tri.next_distribution(tri.initial_state(ctx), ctx);
  for (double x : u.distribution.values()) EXPECT_NEAR(x, 0.25, 1e-12);
}

TEST(Ngram, EmptyCorpus) {
  try {
    ngram_train({}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_corpus);
  }
}

TEST(Ngram, StateIsLastKTokens) {
  Rng rng(9);
  const auto vocab = gen::terminals(3);
  const auto p = ngram_train(gen::corpus(rng, vocab, 20, 6), 2, Vocabulary(vocab));
  for (int i = 0; i < 500; ++i) {
    const SymbolString c = gen::random_string(rng, vocab, 0, 8);
    NgramPredictor::Key expected(2, NgramPredictor::bos);
    for (const auto& s : c) {
      expected.erase(expected.begin());
      expected.push_back(static_cast<int>(*p.vocabulary().find(s)));
    }
    EXPECT_EQ(p.key_of(c), expected);
  }
}

TEST(ToyAttention, MatchesDenseReference) {
  const ToyAttentionPredictor p(0, ToyAttentionPredictor::default_embed_dim, Vocabulary(terminal_string("a b")));
  const SymbolString ctx = terminal_string("a");
  const auto d = p.next_distribution(p.initial_state(ctx), ctx);
  const auto ref = oracle::toy_attention(0, 8, 2, {0});
  ASSERT_EQ(d.distribution.values().size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(d.distribution.values()[i], ref[i], 1e-6);

  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    std::vector<int> c;
    SymbolString s;
    const std::size_t n = gen::below(rng, 10);
    for (std::size_t k = 0; k < n; ++k) {
      c.push_back(static_cast<int>(gen::below(rng, 2)));
      s.push_back(p.vocabulary()[static_cast<std::size_t>(c.back())]);
    }
    const auto got = p.next_distribution(p.initial_state(s), s).distribution.values();
    const auto want = oracle::toy_attention(0, 8, 2, c);
    for (std::size_t k = 0; k < want.size(); ++k) EXPECT_NEAR(got[k], want[k], 1e-9);
  }
}

TEST(ToyAttention, DeterministicAndNormalized) {
  const ToyAttentionPredictor p(17, 6, Vocabulary(terminal_string("x y z")));
  const SymbolString ctx = terminal_string("x z z y");
  const auto d1 = p.next_distribution(p.initial_state(ctx), ctx);
  const auto d2 = p.next_distribution(p.initial_state(ctx), ctx);
  EXPECT_EQ(d1.distribution, d2.distribution);
  EXPECT_NEAR(d1.distribution.sum(), 1.0, 1e-9);
  EXPECT_FALSE(p.finite_state());
}
