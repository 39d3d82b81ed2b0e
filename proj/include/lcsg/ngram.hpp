#pragma once

#include <map>
#include <sstream>
#include <vector>

#include "lcsg/predictor.hpp"

namespace lcsg {

/// Maximum-likelihood k-gram predictor. The state is the last min(k, |context|)
/// tokens; contexts never seen in training fall back to the uniform
/// distribution over vocabulary + END.
///
/// State encoding: "n|<k>|<i1>.<i2>..." with vocabulary indices, left-padded
/// to k entries with '^' (beginning of sequence).
class NgramPredictor final : public Predictor {
 public:
  static constexpr int bos = -1;
  using Key = std::vector<int>;

  NgramPredictor(Vocabulary vocab, std::size_t k, std::map<Key, std::vector<double>> counts)
      : vocab_(std::move(vocab)), k_(k), counts_(std::move(counts)) {}

  PredictorFamily family() const override { return PredictorFamily::ngram; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  bool finite_state() const override { return true; }
  std::size_t order() const noexcept { return k_; }

  PredictorState initial_state(std::span<const Symbol> prompt) const override {
    Key key(k_, bos);
    for (const auto& s : prompt) key = shift(key, static_cast<int>(vocab_.index_of(s)));
    return encode(key);
  }

  Prediction next_distribution(const PredictorState& state, std::span<const Symbol> context) const override {
    check_context(context);
    const Key key = decode(state);
    std::vector<double> probs(vocab_.size() + 1, 0.0);
    if (auto it = counts_.find(key); it != counts_.end()) {
      double total = 0;
      for (double c : it->second) total += c;
      for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = it->second[i] / total;
    } else {
      for (auto& p : probs) p = 1.0 / static_cast<double>(probs.size());
    }
    Prediction out{TokenDistribution(probs), std::vector<std::optional<PredictorState>>(vocab_.size())};
    for (std::size_t i = 0; i < vocab_.size(); ++i)
      if (probs[i] > 0) out.successors[i] = encode(shift(key, static_cast<int>(i)));
    return out;
  }

  /// Readable form used for induced nonterminal names, e.g. "BOS.a".
  std::string state_label(const PredictorState& state) const override {
    const Key key = decode(state);
    if (key.empty()) return "eps";
    std::string out;
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (i) out += '.';
      out += key[i] == bos ? std::string("BOS") : vocab_[static_cast<std::size_t>(key[i])].name;
    }
    return out;
  }

  /// The state key after the given context: its last k tokens, BOS padded.
  Key key_of(std::span<const Symbol> context) const { return decode(initial_state(context)); }

 private:
  Key shift(Key key, int token) const {
    if (k_ == 0) return key;
    key.erase(key.begin());
    key.push_back(token);
    return key;
  }

  PredictorState encode(const Key& key) const {
    std::string enc = "n|" + std::to_string(k_) + "|";
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (i) enc += '.';
      enc += key[i] == bos ? std::string("^") : std::to_string(key[i]);
    }
    return {PredictorFamily::ngram, enc};
  }

  Key decode(const PredictorState& state) const {
    const std::string prefix = "n|" + std::to_string(k_) + "|";
    if (state.family != PredictorFamily::ngram || !state.encoding.starts_with(prefix))
      throw Error(ErrorCode::invalid_argument, "state '" + state.encoding + "' is not a " + std::to_string(k_) + "-gram state");
    Key key;
    std::string body = state.encoding.substr(prefix.size());
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, '.')) {
      if (item == "^") key.push_back(bos);
      else {
        const int v = std::stoi(item);
        if (v < 0 || static_cast<std::size_t>(v) >= vocab_.size())
          throw Error(ErrorCode::invalid_argument, "state '" + state.encoding + "' names an unknown token");
        key.push_back(v);
      }
    }
    if (key.size() != k_) throw Error(ErrorCode::invalid_argument, "malformed n-gram state '" + state.encoding + "'");
    return key;
  }

  Vocabulary vocab_;
  std::size_t k_;
  std::map<Key, std::vector<double>> counts_;
};

/// Counts (last-k context -> next) transitions with END appended to every line.
/// When `vocab` is empty the vocabulary is collected in order of first
/// appearance; otherwise corpus tokens must belong to it.
inline NgramPredictor ngram_train(const std::vector<SymbolString>& corpus, std::size_t k, Vocabulary vocab = {}) {
  if (corpus.empty()) throw Error(ErrorCode::empty_corpus, "corpus has no lines");
  const bool collect = vocab.empty();
  if (collect)
    for (const auto& line : corpus)
      for (const auto& s : line) vocab.add(s);
  std::map<NgramPredictor::Key, std::vector<double>> counts;
  for (const auto& line : corpus) {
    NgramPredictor::Key key(k, NgramPredictor::bos);
    for (std::size_t i = 0; i <= line.size(); ++i) {
      auto& row = counts[key];
      row.resize(vocab.size() + 1, 0.0);
      const std::size_t next = i < line.size() ? vocab.index_of(line[i]) : vocab.size();
      row[next] += 1.0;
      if (i < line.size() && k > 0) {
        key.erase(key.begin());
        key.push_back(static_cast<int>(next));
      }
    }
  }
  return NgramPredictor(std::move(vocab), k, std::move(counts));
}

}  // namespace lcsg
