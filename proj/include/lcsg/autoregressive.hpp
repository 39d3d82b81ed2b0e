#pragma once

// Configuration semantics of autoregressive generation:
//
//   (alpha_t, AM_t) |-ntp (alpha_t, tau_{t+1}, AM_{t+1}) |-cwu (alpha_{t+1}, AM_{t+1})
//
// step_ntp picks the next token and the predictor's successor state without
// touching the context window; step_cwu appends the token to the window.

#include <cstdint>
#include <optional>
#include <vector>

#include "lcsg/predictor.hpp"
#include "lcsg/random.hpp"

namespace lcsg {

struct Configuration {
  SymbolString context;  // alpha_t
  PredictorState state;  // AM_t
  std::size_t t = 0;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct IntermediateConfiguration {
  SymbolString context;                // still alpha_t
  std::optional<Symbol> pending_token;  // tau_{t+1}; nullopt is END
  PredictorState next_state;           // AM_{t+1}
  std::size_t t = 0;

  bool is_end() const noexcept { return !pending_token.has_value(); }
};

enum class DecodingPolicy { greedy, sample };

inline std::string_view to_string(DecodingPolicy p) { return p == DecodingPolicy::greedy ? "greedy" : "sample"; }

inline std::optional<DecodingPolicy> decoding_policy_from_string(std::string_view s) {
  if (s == "greedy") return DecodingPolicy::greedy;
  if (s == "sample") return DecodingPolicy::sample;
  return std::nullopt;
}

/// Index of the largest probability; ties go to the smallest index, with END
/// ranked after every vocabulary token.
inline std::size_t greedy_choice(const TokenDistribution& d) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.values().size(); ++i)
    if (d.values()[i] > d.values()[best]) best = i;
  return best;
}

/// Next-token prediction substep. `rng` is only drawn from under the sample
/// policy (one uniform per call).
inline IntermediateConfiguration step_ntp(const Configuration& c, const Predictor& predictor, DecodingPolicy policy,
                                          Rng& rng) {
  Prediction prediction = predictor.next_distribution(c.state, c.context);
  const auto& probs = prediction.distribution.values();
  const std::size_t choice = policy == DecodingPolicy::greedy ? greedy_choice(prediction.distribution) : rng.pick(probs);
  IntermediateConfiguration ic{c.context, std::nullopt, c.state, c.t};
  if (choice == prediction.distribution.end_index()) return ic;
  ic.pending_token = predictor.vocabulary()[choice];
  if (choice >= prediction.successors.size() || !prediction.successors[choice])
    throw Error(ErrorCode::invalid_argument, "predictor gave no successor state for '" + ic.pending_token->name + "'");
  ic.next_state = *prediction.successors[choice];
  return ic;
}

/// Context window update substep.
inline Configuration step_cwu(const IntermediateConfiguration& ic) {
  if (ic.is_end()) throw Error(ErrorCode::end_token, "END cannot be appended to the context window");
  Configuration c{ic.context, ic.next_state, ic.t + 1};
  c.context.push_back(*ic.pending_token);
  return c;
}

enum class Termination { end_sampled, max_t_reached };

inline std::string_view to_string(Termination t) { return t == Termination::end_sampled ? "END_sampled" : "max_T_reached"; }

inline std::optional<Termination> termination_from_string(std::string_view s) {
  if (s == "END_sampled") return Termination::end_sampled;
  if (s == "max_T_reached") return Termination::max_t_reached;
  return std::nullopt;
}

struct GenerationStep {
  PredictorState before;
  Symbol token;
  PredictorState after;

  friend bool operator==(const GenerationStep&, const GenerationStep&) = default;
};

struct GenerationOptions {
  DecodingPolicy policy = DecodingPolicy::greedy;
  std::uint64_t seed = 0;
  std::size_t max_t = 32;
  /// Sliding context window capacity; unset means unbounded. Bounded runs are
  /// recorded as nonconforming because the window stops being a prefix chain.
  std::optional<std::size_t> window;
};

struct GenerationRecord {
  PredictorFamily family = PredictorFamily::grammar;
  SymbolString prompt;
  PredictorState initial_state;  // AM_0
  std::vector<GenerationStep> steps;
  SymbolString final;  // alpha_T
  Termination termination = Termination::max_t_reached;
  std::uint64_t seed = 0;
  DecodingPolicy policy = DecodingPolicy::greedy;
  std::size_t max_t = 0;
  std::optional<std::size_t> window;

  bool conforming() const noexcept { return !window.has_value(); }

  /// AM_T: the state after the last emitted token.
  const PredictorState& final_state() const noexcept { return steps.empty() ? initial_state : steps.back().after; }

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

namespace detail {
inline void slide(SymbolString& context, std::optional<std::size_t> window) {
  if (window && context.size() > *window)
    context.erase(context.begin(), context.end() - static_cast<std::ptrdiff_t>(*window));
}
}  // namespace detail

/// Alternates step_ntp / step_cwu from (prompt, AM_0) until END is chosen or
/// max_t tokens have been emitted. A pure function of its arguments.
inline GenerationRecord generate(const Predictor& predictor, std::span<const Symbol> prompt,
                                 const GenerationOptions& options) {
  GenerationRecord rec;
  rec.family = predictor.family();
  rec.prompt.assign(prompt.begin(), prompt.end());
  rec.final = rec.prompt;
  rec.seed = options.seed;
  rec.policy = options.policy;
  rec.max_t = options.max_t;
  rec.window = options.window;
  rec.initial_state = predictor.initial_state(prompt);

  Rng rng(options.seed);
  Configuration c{rec.prompt, rec.initial_state, 0};
  detail::slide(c.context, options.window);
  rec.termination = Termination::max_t_reached;
  while (c.t < options.max_t) {
    IntermediateConfiguration ic = step_ntp(c, predictor, options.policy, rng);
    if (ic.is_end()) {
      rec.termination = Termination::end_sampled;
      break;
    }
    rec.steps.push_back({c.state, *ic.pending_token, ic.next_state});
    rec.final.push_back(*ic.pending_token);
    c = step_cwu(ic);
    detail::slide(c.context, options.window);
  }
  return rec;
}

}  // namespace lcsg
