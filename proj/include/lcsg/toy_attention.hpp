#pragma once

// Single-layer, single-head causal self-attention next-token predictor with
// fixed, seeded weights. For vocabulary size V, embedding width d, and input
// x_0..x_n = [BOS] ++ context (BOS has embedding row V):
//
//   weights, drawn row-major in this order from Rng(seed).uniform(-0.5, 0.5):
//     E  : (V+1) x d   token embeddings (row V is BOS)
//     Wq : d x d,  Wk : d x d,  Wv : d x d
//     Wo : (V+1) x d   output projection (row V is END)
//   h_p    = E[x_p] + P_p,  P_p[2i] = sin(p / 10000^(2i/d)), P_p[2i+1] = cos(p / 10000^(2i/d))
//   q      = Wq h_n,  k_p = Wk h_p,  v_p = Wv h_p
//   a      = softmax_p(q . k_p / sqrt(d))          (p = 0..n, causal by construction)
//   o      = sum_p a_p v_p
//   logits = Wo o,  P(next) = softmax(logits)       (index V is END)
//
// At most max_positions inputs (BOS included) are accepted.

#include <cmath>
#include <string>
#include <vector>

#include "lcsg/predictor.hpp"
#include "lcsg/random.hpp"

namespace lcsg {

class ToyAttentionPredictor final : public Predictor {
 public:
  static constexpr std::size_t default_embed_dim = 8;
  static constexpr std::size_t max_positions = 64;

  ToyAttentionPredictor(std::uint64_t seed, std::size_t embed_dim, Vocabulary vocab)
      : vocab_(std::move(vocab)), d_(embed_dim), seed_(seed) {
    if (d_ == 0) throw Error(ErrorCode::invalid_argument, "embed_dim must be at least 1");
    if (vocab_.empty()) throw Error(ErrorCode::invalid_argument, "vocabulary must not be empty");
    const std::size_t rows = vocab_.size() + 1;
    Rng rng(seed);
    auto draw = [&](std::size_t n) {
      std::vector<double> m(n);
      for (auto& x : m) x = rng.uniform(-0.5, 0.5);
      return m;
    };
    embed_ = draw(rows * d_);
    wq_ = draw(d_ * d_);
    wk_ = draw(d_ * d_);
    wv_ = draw(d_ * d_);
    wo_ = draw(rows * d_);
  }

  PredictorFamily family() const override { return PredictorFamily::toy_attention; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  bool finite_state() const override { return false; }
  std::size_t embed_dim() const noexcept { return d_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// The state records the whole consumed context: "a|<i1>.<i2>...".
  PredictorState initial_state(std::span<const Symbol> prompt) const override {
    std::string enc = "a|";
    for (std::size_t i = 0; i < prompt.size(); ++i) {
      if (i) enc += '.';
      enc += std::to_string(vocab_.index_of(prompt[i]));
    }
    return {PredictorFamily::toy_attention, enc};
  }

  Prediction next_distribution(const PredictorState& state, std::span<const Symbol> context) const override {
    if (state.family != PredictorFamily::toy_attention || !state.encoding.starts_with("a|"))
      throw Error(ErrorCode::invalid_argument, "state '" + state.encoding + "' is not a toy attention state");
    const auto ids = vocab_.encode(context);
    const auto probs = forward(ids);
    Prediction out{TokenDistribution(probs), std::vector<std::optional<PredictorState>>(vocab_.size())};
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      std::string enc = state.encoding;
      if (enc.size() > 2) enc += '.';
      enc += std::to_string(i);
      out.successors[i] = PredictorState{PredictorFamily::toy_attention, std::move(enc)};
    }
    return out;
  }

  /// Probabilities over vocabulary + END for a context given as indices.
  std::vector<double> forward(std::span<const std::size_t> context) const {
    const std::size_t n = context.size() + 1;
    if (n > max_positions)
      throw Error(ErrorCode::invalid_argument, "context longer than " + std::to_string(max_positions - 1) + " tokens");
    const std::size_t rows = vocab_.size() + 1;

    std::vector<std::vector<double>> h(n, std::vector<double>(d_));
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t tok = p == 0 ? vocab_.size() : context[p - 1];
      for (std::size_t j = 0; j < d_; ++j) {
        const double freq = std::pow(10000.0, static_cast<double>(2 * (j / 2)) / static_cast<double>(d_));
        const double angle = static_cast<double>(p) / freq;
        h[p][j] = embed_[tok * d_ + j] + (j % 2 == 0 ? std::sin(angle) : std::cos(angle));
      }
    }
    auto matvec = [&](const std::vector<double>& m, const std::vector<double>& x, std::size_t out_rows) {
      std::vector<double> y(out_rows, 0.0);
      for (std::size_t r = 0; r < out_rows; ++r)
        for (std::size_t c = 0; c < d_; ++c) y[r] += m[r * d_ + c] * x[c];
      return y;
    };
    const auto q = matvec(wq_, h[n - 1], d_);
    std::vector<double> scores(n);
    std::vector<std::vector<double>> values(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_));
    for (std::size_t p = 0; p < n; ++p) {
      const auto k = matvec(wk_, h[p], d_);
      double dot = 0;
      for (std::size_t j = 0; j < d_; ++j) dot += q[j] * k[j];
      scores[p] = dot * scale;
      values[p] = matvec(wv_, h[p], d_);
    }
    const auto attn = softmax(scores);
    std::vector<double> o(d_, 0.0);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t j = 0; j < d_; ++j) o[j] += attn[p] * values[p][j];
    return softmax(matvec(wo_, o, rows));
  }

 private:
  static std::vector<double> softmax(std::vector<double> x) {
    double m = x[0];
    for (double v : x) m = std::max(m, v);
    double total = 0;
    for (auto& v : x) total += (v = std::exp(v - m));
    for (auto& v : x) v /= total;
    return x;
  }

  Vocabulary vocab_;
  std::size_t d_;
  std::uint64_t seed_;
  std::vector<double> embed_, wq_, wk_, wv_, wo_;
};

}  // namespace lcsg
