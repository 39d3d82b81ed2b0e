#pragma once

#include <cmath>
#include <map>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "lcsg/derivation.hpp"
#include "lcsg/random.hpp"

namespace lcsg {

/// A grammar with one non-negative weight per production (taken from the
/// production's `weight`, default 1.0). Step probabilities come from
/// renormalizing the weights of all steps applicable to the whole current
/// sentential form.
class WeightedGrammar {
 public:
  explicit WeightedGrammar(Grammar g) : grammar_(std::move(g)) {
    auto report = validate_grammar(grammar_);
    if (!report.ok()) throw Error(ErrorCode::invalid_grammar, report.violations.front());
    for (const auto& p : grammar_.productions) weights_.push_back(p.weight_or_default());
    // at least one positive weight per nonterminal that occurs in some lhs
    std::map<std::string, bool> positive;
    for (std::size_t i = 0; i < weights_.size(); ++i)
      for (const auto& s : grammar_.productions[i].lhs)
        if (s.is_nonterminal()) positive[s.name] = positive[s.name] || weights_[i] > 0;
    for (const auto& [name, ok] : positive)
      if (!ok) throw Error(ErrorCode::invalid_grammar, "every production mentioning '" + name + "' has weight 0");
  }

  const Grammar& grammar() const noexcept { return grammar_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  Grammar grammar_;
  std::vector<double> weights_;
};

struct WeightedStep {
  DerivationStep step;
  double probability;
};

/// Distribution over the applicable steps of `form`, in successors() order.
/// An all-terminal form yields an empty distribution.
inline std::vector<WeightedStep> normalize_weights(const WeightedGrammar& wg, std::span<const Symbol> form) {
  auto steps = successors(form, wg.grammar());
  if (steps.empty()) {
    if (is_all_terminal(form)) return {};
    throw Error(ErrorCode::dead_end, "no production applies to '" + to_string(form) + "'");
  }
  double total = 0;
  for (const auto& s : steps) total += wg.weights()[s.production_index];
  if (!(total > 0)) throw Error(ErrorCode::zero_mass, "all applicable steps of '" + to_string(form) + "' weigh 0");
  std::vector<WeightedStep> out;
  out.reserve(steps.size());
  for (auto& s : steps) {
    const double w = wg.weights()[s.production_index];
    out.push_back({std::move(s), w / total});
  }
  return out;
}

struct SampleResult {
  DerivationTrace trace;
  bool truncated = false;  // max_steps reached before an all-terminal form
};

/// Reusable sampler over a compiled view of one weighted grammar.
class DerivationSampler {
 public:
  explicit DerivationSampler(const WeightedGrammar& wg) : wg_(&wg), cg_(wg.grammar()) {}

  /// Samples from [start] until the form is all-terminal or `max_steps` steps
  /// were taken. One uniform draw per step.
  SampleResult sample(std::uint64_t seed, std::size_t max_steps) const {
    Rng rng(seed);
    SampleResult out;
    detail::Form form(1, cg_.start());
    out.trace.start = cg_.decode(form);
    std::vector<std::pair<std::size_t, std::size_t>> redexes;
    std::vector<double> weights;
    while (!cg_.all_terminal(form)) {
      if (out.trace.steps.size() >= max_steps) {
        out.truncated = true;
        return out;
      }
      redexes.clear();
      weights.clear();
      cg_.for_each_redex(form, [&](std::size_t i, std::size_t pos) {
        redexes.emplace_back(i, pos);
        weights.push_back(wg_->weights()[i]);
      });
      if (redexes.empty())
        throw Error(ErrorCode::dead_end, "no production applies to '" + to_string(cg_.decode(form)) + "'");
      double total = 0;
      for (double w : weights) total += w;
      if (!(total > 0))
        throw Error(ErrorCode::zero_mass, "all applicable steps of '" + to_string(cg_.decode(form)) + "' weigh 0");
      auto [i, pos] = redexes[rng.pick(weights)];
      detail::Form next = detail::CompiledGrammar::rewrite(form, cg_.productions()[i], pos);
      out.trace.steps.push_back({cg_.decode(form), i, pos, cg_.decode(next)});
      form = std::move(next);
    }
    return out;
  }

 private:
  const WeightedGrammar* wg_;
  detail::CompiledGrammar cg_;
};

inline SampleResult sample_derivation(const WeightedGrammar& wg, std::uint64_t seed, std::size_t max_steps) {
  return DerivationSampler(wg).sample(seed, max_steps);
}

/// Probabilities of terminal strings up to `bound`. Mass on longer strings or
/// on derivations that never terminate is the residual.
struct StringDistribution {
  std::map<SymbolString, double, ShortlexLess> support;
  std::size_t bound = 0;

  double probability(const SymbolString& w) const {
    auto it = support.find(w);
    return it == support.end() ? 0.0 : it->second;
  }
  double mass() const {
    double m = 0;
    for (const auto& [w, p] : support) m += p;
    return m;
  }
  double residual() const { return std::max(0.0, 1.0 - mass()); }
};

namespace detail {

/// Exact absorption probabilities into all-terminal forms of length <= cap.
/// Builds the reachable form graph, then solves h(f) = sum_g P(f->g) h(g) one
/// strongly connected component at a time in reverse topological order.
template <class Prune>
std::map<Form, double> absorption(const WeightedGrammar& wg, const CompiledGrammar& cg, std::size_t cap,
                                  std::size_t fuel, Prune&& prune) {
  struct Edge {
    std::size_t to;
    double p;
  };
  std::vector<Form> forms;
  std::vector<std::vector<Edge>> edges;
  std::unordered_map<Form, std::size_t> index;
  auto intern = [&](Form f) {
    auto [it, inserted] = index.emplace(std::move(f), forms.size());
    if (inserted) {
      forms.push_back(it->first);
      edges.emplace_back();
    }
    return it->second;
  };
  intern(Form(1, cg.start()));
  std::size_t expanded = 0;
  for (std::size_t head = 0; head < forms.size(); ++head) {
    if (cg.all_terminal(forms[head])) continue;
    if (expanded++ >= fuel)
      throw Error(ErrorCode::fuel_exhausted, "probability search needs more than " + std::to_string(fuel) + " expansions");
    const Form form = forms[head];
    std::vector<std::pair<Form, double>> out;
    double total = 0;
    cg.for_each_redex(form, [&](std::size_t i, std::size_t pos) {
      const auto& p = cg.productions()[i];
      const double w = wg.weights()[i];
      total += w;
      if (w <= 0 || form.size() - p.lhs.size() + p.rhs.size() > cap) return;
      Form next = CompiledGrammar::rewrite(form, p, pos);
      if (prune(next)) return;
      out.emplace_back(std::move(next), w);
    });
    if (!(total > 0)) continue;  // dead end or zero mass: contributes nothing
    for (auto& [next, w] : out) {
      const std::size_t to = intern(std::move(next));
      auto& es = edges[head];
      auto same = std::find_if(es.begin(), es.end(), [&](const Edge& e) { return e.to == to; });
      if (same != es.end()) same->p += w / total;
      else es.push_back({to, w / total});
    }
  }

  // Iterative Tarjan; components are emitted sinks first.
  const std::size_t n = forms.size();
  constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> order(n, unvisited), low(n, 0), component(n, unvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (order[root] != unvisited) continue;
    std::vector<std::pair<std::size_t, std::size_t>> call{{root, 0}};
    order[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, next_edge] = call.back();
      if (next_edge < edges[v].size()) {
        const std::size_t w = edges[v][next_edge++].to;
        if (order[w] == unvisited) {
          order[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], order[w]);
        }
        continue;
      }
      if (low[v] == order[v]) {
        std::vector<std::size_t> members;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component[w] = components.size();
          members.push_back(w);
        } while (w != v);
        components.push_back(std::move(members));
      }
      const std::size_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }

  std::vector<std::map<Form, double>> h(n);
  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto& members = components[c];
    if (members.size() == 1) {
      const std::size_t v = members[0];
      if (cg.all_terminal(forms[v])) {
        h[v][forms[v]] = 1.0;
        continue;
      }
      double self = 0;
      for (const auto& e : edges[v]) {
        if (e.to == v) {
          self += e.p;
          continue;
        }
        for (const auto& [t, p] : h[e.to]) h[v][t] += e.p * p;
      }
      if (self > 0) {
        if (self >= 1.0) h[v].clear();
        else
          for (auto& [t, p] : h[v]) p /= (1.0 - self);
      }
      continue;
    }
    // (I - M) H = B over the component's members
    std::map<std::size_t, std::size_t> local;
    for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = i;
    std::map<Form, std::size_t> targets;
    for (std::size_t v : members)
      for (const auto& e : edges[v])
        if (component[e.to] != c)
          for (const auto& [t, p] : h[e.to]) targets.emplace(t, targets.size());
    if (targets.empty()) continue;
    const auto k = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, static_cast<Eigen::Index>(targets.size()));
    for (std::size_t i = 0; i < members.size(); ++i)
      for (const auto& e : edges[members[i]]) {
        if (component[e.to] == c) {
          a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(local[e.to])) -= e.p;
        } else {
          for (const auto& [t, p] : h[e.to])
            b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(targets[t])) += e.p * p;
        }
      }
    Eigen::MatrixXd x = a.partialPivLu().solve(b);
    for (std::size_t i = 0; i < members.size(); ++i)
      for (const auto& [t, j] : targets) {
        const double p = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (p > 0) h[members[i]][t] = p;
      }
  }
  return h[0];
}

}  // namespace detail

/// Exact distribution over L(G) restricted to strings of length <= max_len.
inline StringDistribution exact_distribution(const WeightedGrammar& wg, std::size_t max_len,
                                             std::size_t fuel = default_fuel) {
  detail::require_noncontracting(wg.grammar());
  detail::CompiledGrammar cg(wg.grammar());
  StringDistribution d;
  d.bound = max_len;
  for (const auto& [w, p] : detail::absorption(wg, cg, max_len, fuel, [](const detail::Form&) { return false; }))
    if (p > 0) d.support.emplace(cg.decode(w), p);
  return d;
}

/// Sum over all complete derivations of w of the product of step
/// probabilities; 0 for strings outside L(G).
inline double string_probability(const WeightedGrammar& wg, std::span<const Symbol> w, std::size_t fuel = default_fuel) {
  detail::require_noncontracting(wg.grammar());
  if (!is_all_terminal(w)) throw Error(ErrorCode::invalid_argument, "string must be terminal");
  detail::CompiledGrammar cg(wg.grammar());
  for (const auto& s : w)
    if (!cg.find_id(s)) return 0.0;
  const detail::Form goal = cg.encode(w);
  detail::TargetPruner prune(cg, goal, true);
  auto h = detail::absorption(wg, cg, w.size(), fuel, prune);
  auto it = h.find(goal);
  return it == h.end() ? 0.0 : it->second;
}

/// Empirical distribution of `samples` derivations seeded seed, seed+1, ...
/// Truncated runs and strings longer than max_len count toward the residual.
inline StringDistribution empirical_distribution(const WeightedGrammar& wg, std::size_t samples, std::uint64_t seed,
                                                 std::size_t max_len, std::size_t max_steps) {
  DerivationSampler sampler(wg);
  std::map<SymbolString, std::size_t, ShortlexLess> counts;
  for (std::size_t i = 0; i < samples; ++i) {
    auto r = sampler.sample(seed + i, max_steps);
    if (r.truncated || r.trace.result().size() > max_len) continue;
    ++counts[r.trace.result()];
  }
  StringDistribution d;
  d.bound = max_len;
  for (auto& [w, c] : counts) d.support.emplace(w, static_cast<double>(c) / static_cast<double>(samples));
  return d;
}

/// Half the L1 distance, with the residual of each side treated as one more
/// outcome.
inline double total_variation(const StringDistribution& d1, const StringDistribution& d2) {
  if (d1.bound != d2.bound)
    throw Error(ErrorCode::bound_mismatch,
                "length bounds differ (" + std::to_string(d1.bound) + " vs " + std::to_string(d2.bound) + ")");
  double sum = 0;
  for (const auto& [w, p] : d1.support) sum += std::abs(p - d2.probability(w));
  for (const auto& [w, p] : d2.support)
    if (!d1.support.contains(w)) sum += p;
  sum += std::abs(d1.residual() - d2.residual());
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

}  // namespace lcsg
