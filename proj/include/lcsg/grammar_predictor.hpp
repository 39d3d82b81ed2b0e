#pragma once

#include <cstdio>
#include <map>
#include <memory>
#include <sstream>

#include "lcsg/compiled_grammar.hpp"
#include "lcsg/predictor.hpp"
#include "lcsg/stochastic.hpp"

namespace lcsg {

/// Next-token predictor that runs a weighted left context-sensitive grammar
/// left to right. Every reachable sentential form is (emitted context) ++
/// (pending suffix), where the pending suffix is a terminal string optionally
/// followed by one nonterminal. The state is the posterior over pending
/// suffixes given the emitted context, plus the last (max lhs length - 1)
/// context tokens that productions can inspect.
///
/// State encoding: "g|<suffix ids>|<pending ids>:<mass>;..." with symbol ids
/// of the compiled grammar and masses rounded to 12 significant digits so that
/// posteriors equal up to floating-point noise share one encoding.
class GrammarPredictor final : public Predictor {
 public:
  explicit GrammarPredictor(WeightedGrammar wg)
      : wg_(std::make_shared<const WeightedGrammar>(std::move(wg))),
        cg_(std::make_shared<const detail::CompiledGrammar>(wg_->grammar())),
        vocab_(wg_->grammar().terminals) {
    const Grammar& g = wg_->grammar();
    const auto cls = classify_grammar(g);
    if (cls != ProductionClass::regular && cls != ProductionClass::context_free && cls != ProductionClass::left_cs)
      throw Error(ErrorCode::invalid_argument, "grammar is not left context-sensitive");
    std::size_t longest = 1;
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
      const auto& p = g.productions[i];
      longest = std::max(longest, p.lhs.size());
      // only lhs of the shape (terminals) N can match a left-linear form
      if (!fires_on_left_linear(p.lhs)) continue;
      if (!left_linear(p.rhs))
        throw Error::at_index(ErrorCode::not_left_linearizable,
                              "production " + std::to_string(i) + " yields '" + to_string(p.rhs) +
                                  "', placing a nonterminal left of a terminal or two nonterminals in one form",
                              i);
    }
    keep_ = longest - 1;
  }

  PredictorFamily family() const override { return PredictorFamily::grammar; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  bool finite_state() const override { return true; }
  const WeightedGrammar& weighted_grammar() const noexcept { return *wg_; }

  PredictorState initial_state(std::span<const Symbol> prompt) const override {
    Belief b;
    b.items.push_back({detail::Form(1, cg_->start()), 1.0});
    PredictorState state = encode(b);
    for (std::size_t i = 0; i < prompt.size(); ++i) {
      const std::size_t tok = vocab_.index_of(prompt[i]);
      auto prediction = next_distribution(state, std::span<const Symbol>(prompt.data(), i));
      if (!prediction.successors[tok])
        throw Error(ErrorCode::invalid_argument, "prompt '" + to_string(prompt) + "' has probability 0 under the grammar");
      state = *prediction.successors[tok];
    }
    return state;
  }

  Prediction next_distribution(const PredictorState& state, std::span<const Symbol> context) const override {
    check_context(context);
    const Belief b = decode(state);
    const auto resolved = resolve(b);

    std::vector<double> probs(vocab_.size() + 1, 0.0);
    double total = 0;
    for (const auto& [pending, mass] : resolved) {
      total += mass;
      if (pending.empty()) probs.back() += mass;
      else probs[token_index(pending.front())] += mass;
    }
    if (!(total > 0)) throw Error(ErrorCode::dead_end, "no derivation continues from state '" + state.encoding + "'");
    for (auto& p : probs) p /= total;

    Prediction out{TokenDistribution(probs), std::vector<std::optional<PredictorState>>(vocab_.size())};
    for (std::size_t tok = 0; tok < vocab_.size(); ++tok) {
      if (probs[tok] <= 0) continue;
      Belief next;
      next.suffix = b.suffix;
      next.suffix.push_back(cg_->id_of(vocab_[tok]));
      if (next.suffix.size() > keep_) next.suffix.erase(0, next.suffix.size() - keep_);
      double mass_tok = 0;
      for (const auto& [pending, mass] : resolved)
        if (!pending.empty() && token_index(pending.front()) == tok) mass_tok += mass;
      std::map<detail::Form, double> merged;
      for (const auto& [pending, mass] : resolved)
        if (!pending.empty() && token_index(pending.front()) == tok) merged[pending.substr(1)] += mass / mass_tok;
      for (auto& [pending, mass] : merged) next.items.push_back({pending, mass});
      out.successors[tok] = encode(next);
    }
    return out;
  }

  std::string state_label(const PredictorState& state) const override {
    const Belief b = decode(state);
    std::string out;
    for (const auto& item : b.items) {
      if (!out.empty()) out += '+';
      if (item.pending.empty()) out += "end";
      for (std::size_t i = 0; i < item.pending.size(); ++i) {
        if (i) out += '.';
        out += cg_->symbol(item.pending[i]).name;
      }
    }
    return out;
  }

 private:
  struct Item {
    detail::Form pending;
    double mass;
  };
  struct Belief {
    detail::Form suffix;
    std::vector<Item> items;  // sorted by pending, masses sum to 1
  };

  static bool fires_on_left_linear(const SymbolString& lhs) {
    if (lhs.empty() || !lhs.back().is_nonterminal()) return false;
    return std::all_of(lhs.begin(), lhs.end() - 1, [](const Symbol& s) { return s.is_terminal(); });
  }

  static bool left_linear(const SymbolString& rhs) {
    for (std::size_t i = 0; i + 1 < rhs.size(); ++i)
      if (rhs[i].is_nonterminal()) return false;
    return true;
  }

  std::size_t token_index(char32_t id) const { return vocab_.index_of(cg_->symbol(id)); }

  /// Expands pending suffixes that are a lone nonterminal until every suffix
  /// is empty (END) or starts with a terminal. Mass on dead ends is dropped.
  std::map<detail::Form, double> resolve(const Belief& b) const {
    std::map<detail::Form, double> done, work;
    for (const auto& item : b.items) work[item.pending] += item.mass;
    const std::size_t limit = wg_->grammar().nonterminals.size() + 1;
    for (std::size_t round = 0; !work.empty(); ++round) {
      if (round > limit) throw Error(ErrorCode::invalid_argument, "grammar has a cycle of unit productions");
      std::map<detail::Form, double> next;
      for (const auto& [pending, mass] : work) {
        if (pending.empty() || cg_->is_terminal(pending.front())) {
          done[pending] += mass;
          continue;
        }
        // pending == [A]; the form is context ++ [A]
        const char32_t nt = pending.front();
        std::vector<std::pair<std::size_t, double>> applicable;
        double total = 0;
        for (std::size_t i = 0; i < cg_->productions().size(); ++i) {
          const auto& p = cg_->productions()[i];
          if (p.lhs.empty() || p.lhs.back() != nt) continue;
          const std::size_t ctx = p.lhs.size() - 1;
          if (ctx > b.suffix.size()) continue;
          if (b.suffix.compare(b.suffix.size() - ctx, ctx, p.lhs, 0, ctx) != 0) continue;
          applicable.emplace_back(i, p.weight);
          total += p.weight;
        }
        if (!(total > 0)) continue;
        for (auto [i, w] : applicable) {
          if (w <= 0) continue;
          const auto& p = cg_->productions()[i];
          next[p.rhs.substr(p.lhs.size() - 1)] += mass * w / total;
        }
      }
      work = std::move(next);
    }
    return done;
  }

  PredictorState encode(const Belief& b) const {
    std::string enc = "g|";
    for (std::size_t i = 0; i < b.suffix.size(); ++i) {
      if (i) enc += '.';
      enc += std::to_string(static_cast<std::uint32_t>(b.suffix[i]));
    }
    enc += '|';
    for (std::size_t k = 0; k < b.items.size(); ++k) {
      if (k) enc += ';';
      const auto& item = b.items[k];
      for (std::size_t i = 0; i < item.pending.size(); ++i) {
        if (i) enc += '.';
        enc += std::to_string(static_cast<std::uint32_t>(item.pending[i]));
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, ":%.12g", item.mass);
      enc += buf;
    }
    return {PredictorFamily::grammar, enc};
  }

  Belief decode(const PredictorState& state) const {
    const auto& e = state.encoding;
    if (state.family != PredictorFamily::grammar || !e.starts_with("g|"))
      throw Error(ErrorCode::invalid_argument, "state '" + e + "' is not a grammar state");
    const auto bar = e.find('|', 2);
    if (bar == std::string::npos) throw Error(ErrorCode::invalid_argument, "malformed grammar state '" + e + "'");
    auto ids = [&](const std::string& s) {
      detail::Form f;
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, '.')) {
        const unsigned long v = std::stoul(item);
        if (v >= cg_->symbol_count()) throw Error(ErrorCode::invalid_argument, "grammar state names unknown symbol");
        f.push_back(static_cast<char32_t>(v));
      }
      return f;
    };
    Belief b;
    b.suffix = ids(e.substr(2, bar - 2));
    std::stringstream ss(e.substr(bar + 1));
    std::string item;
    while (std::getline(ss, item, ';')) {
      const auto colon = item.rfind(':');
      if (colon == std::string::npos) throw Error(ErrorCode::invalid_argument, "malformed grammar state '" + e + "'");
      b.items.push_back({ids(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    }
    return b;
  }

  std::shared_ptr<const WeightedGrammar> wg_;
  std::shared_ptr<const detail::CompiledGrammar> cg_;
  Vocabulary vocab_;
  std::size_t keep_ = 0;
};

inline GrammarPredictor grammar_predictor(WeightedGrammar wg) { return GrammarPredictor(std::move(wg)); }

}  // namespace lcsg
