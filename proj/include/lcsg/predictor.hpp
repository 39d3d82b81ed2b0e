#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcsg/symbol.hpp"

namespace lcsg {

enum class PredictorFamily { grammar, ngram, toy_attention };

inline std::string_view to_string(PredictorFamily f) {
  switch (f) {
    case PredictorFamily::grammar: return "grammar";
    case PredictorFamily::ngram: return "ngram";
    case PredictorFamily::toy_attention: return "toy_attention";
  }
  return "?";
}

inline std::optional<PredictorFamily> predictor_family_from_string(std::string_view s) {
  for (auto f : {PredictorFamily::grammar, PredictorFamily::ngram, PredictorFamily::toy_attention})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

/// Ordered set of terminal tokens; the position of a token is its index and
/// the greedy tie-break. END is not part of the vocabulary.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<Symbol> tokens) {
    for (auto& t : tokens) add(std::move(t));
  }

  /// Appends a token unless present; returns its index.
  std::size_t add(Symbol token) {
    if (!token.is_terminal()) throw Error(ErrorCode::invalid_argument, "vocabulary entries must be terminals");
    if (auto problem = symbol_name_problem(token.name); !problem.empty())
      throw Error(ErrorCode::invalid_argument, "bad token '" + token.name + "': " + problem);
    auto [it, inserted] = index_.emplace(token.name, tokens_.size());
    if (inserted) tokens_.push_back(std::move(token));
    return it->second;
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const Symbol& operator[](std::size_t i) const { return tokens_.at(i); }
  const std::vector<Symbol>& tokens() const noexcept { return tokens_; }

  std::optional<std::size_t> find(const Symbol& s) const {
    if (!s.is_terminal()) return std::nullopt;
    auto it = index_.find(s.name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const Symbol& s) const {
    if (auto i = find(s)) return *i;
    throw Error(ErrorCode::unknown_token, "'" + s.name + "' is not in the vocabulary");
  }

  std::vector<std::size_t> encode(std::span<const Symbol> s) const {
    std::vector<std::size_t> out;
    out.reserve(s.size());
    for (const auto& x : s) out.push_back(index_of(x));
    return out;
  }

 private:
  std::vector<Symbol> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Opaque predictor state AM_t: a canonical, whitespace-free encoding. Equal
/// encodings mean equal states.
struct PredictorState {
  PredictorFamily family = PredictorFamily::grammar;
  std::string encoding;

  friend bool operator==(const PredictorState&, const PredictorState&) = default;
};

/// Next-token distribution over vocabulary indices plus END (stored last).
class TokenDistribution {
 public:
  TokenDistribution() = default;
  explicit TokenDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw Error(ErrorCode::invalid_argument, "distribution needs at least the END entry");
    double total = 0;
    for (double p : probs_) {
      if (!(p >= 0) || !std::isfinite(p)) throw Error(ErrorCode::invalid_argument, "negative or non-finite probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw Error(ErrorCode::invalid_argument, "probabilities sum to " + std::to_string(total));
  }

  std::size_t vocab_size() const noexcept { return probs_.size() - 1; }
  std::size_t end_index() const noexcept { return probs_.size() - 1; }
  double token(std::size_t i) const { return probs_.at(i); }
  double end() const { return probs_.back(); }
  const std::vector<double>& values() const noexcept { return probs_; }

  double sum() const {
    double s = 0;
    for (double p : probs_) s += p;
    return s;
  }

  friend bool operator==(const TokenDistribution&, const TokenDistribution&) = default;

 private:
  std::vector<double> probs_;
};

/// Result of one prediction: the distribution and, for every token with
/// positive probability, the state the predictor moves to when that token is
/// chosen (AM_{t+1}).
struct Prediction {
  TokenDistribution distribution;
  std::vector<std::optional<PredictorState>> successors;  // indexed by vocabulary index
};

/// The "attention mechanism" of a bare-bones autoregressive model.
/// Implementations are immutable after construction.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual PredictorFamily family() const = 0;
  virtual const Vocabulary& vocabulary() const = 0;

  /// Whether the reachable state set is finite, which makes grammar induction
  /// by state identity meaningful.
  virtual bool finite_state() const = 0;

  /// AM_0: the state after the prompt has been read.
  virtual PredictorState initial_state(std::span<const Symbol> prompt) const = 0;

  /// Pure in (state, context). Throws UnknownToken on out-of-vocabulary input.
  virtual Prediction next_distribution(const PredictorState& state, std::span<const Symbol> context) const = 0;

  /// Short whitespace-free name for a state, used to name induced nonterminals.
  virtual std::string state_label(const PredictorState& state) const { return state.encoding; }

 protected:
  void check_context(std::span<const Symbol> context) const {
    for (const auto& s : context) vocabulary().index_of(s);
  }
};

}  // namespace lcsg
