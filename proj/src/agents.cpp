#include "bampf/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace bampf {

namespace {

// Deterministic helpers on top of the standard engine; distribution classes
// are implementation-defined, so sampling is done on raw engine output.
int rng_index(std::mt19937_64& eng, int n) { return static_cast<int>(eng() % n); }
double rng_unit(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }

struct EvalKey {
  StateId s = 0;
  int depth = 0;
  std::vector<std::int64_t> belief_q;
  StatValue stats;
  bool operator==(const EvalKey&) const = default;
};

struct EvalKeyHash {
  std::size_t operator()(const EvalKey& k) const {
    std::size_t h = hash_stat(k.stats);
    h ^= std::hash<int>{}(k.s) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= std::hash<int>{}(k.depth) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    for (std::int64_t q : k.belief_q)
      h ^= std::hash<std::int64_t>{}(q) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
  }
};

std::vector<std::int64_t> quantize(const Belief& b) {
  std::vector<std::int64_t> q(b.w.size());
  for (size_t i = 0; i < b.w.size(); ++i) q[i] = std::llround(b.w[i] * 1e12);
  return q;
}

// Shaped value of following a fixed stationary policy from aug for `horizon`
// steps: extrinsic rewards plus F, beliefs and statistics evolving along the
// mixture dynamics. Memoized depth-limited recursion.
class FixedPolicyEval {
 public:
  FixedPolicyEval(const PriorMixture& prior, const StationaryPolicy& pi,
                  const PseudoReward* shaping)
      : prior_(prior), pi_(pi), shaping_(shaping), gamma_(prior.discount()) {}

  double value(const AugmentedState& aug, int depth) {
    if (depth == 0) return 0.0;
    EvalKey key{aug.s, depth, quantize(aug.belief), aug.stats};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    double acc = 0.0;
    const auto& slots = pi_.slot_probs[aug.s];
    for (size_t slot = 0; slot < slots.size(); ++slot) {
      if (slots[slot] == 0.0) continue;
      ActionId a = prior_.applicable(aug.s)[slot];
      for (const Successor& sc : successor_distribution(prior_, aug, a, shaping_))
        acc += slots[slot] * sc.prob * (sc.reward + sc.f_value + gamma_ * value(sc.aug, depth - 1));
    }
    memo_.emplace(std::move(key), acc);
    return acc;
  }

 private:
  const PriorMixture& prior_;
  const StationaryPolicy& pi_;
  const PseudoReward* shaping_;
  double gamma_;
  std::unordered_map<EvalKey, double, EvalKeyHash> memo_;
};

// Frozen-belief action values against fixed per-model policy values.
double frozen_q(const InterpretedBelief& ib, const std::vector<ValueFunction>& vfs, StateId s,
                ActionId a, double gamma) {
  double q = 0.0;
  for (size_t m = 0; m < ib.models.size(); ++m) {
    if (ib.weights[m] <= 0.0) continue;
    double inner = 0.0;
    for (const auto& o : ib.models[m]->outcomes(s, a))
      inner += o.prob * (o.reward.mean() + gamma * vfs[m].v[o.next]);
    q += ib.weights[m] * inner;
  }
  return q;
}

StationaryPolicy local_search_policy(const InterpretedBelief& ib, StateId query,
                                     const CeSearchConfig& cfg, double* best_value) {
  const FiniteMdp& shape = *ib.models[0];
  std::mt19937_64 eng(cfg.rng_seed);
  StationaryPolicy best;
  double best_v = -std::numeric_limits<double>::infinity();

  for (int restart = 0; restart <= cfg.restarts; ++restart) {
    std::vector<ActionId> acts(shape.n_states);
    for (int s = 0; s < shape.n_states; ++s) {
      const auto& app = shape.applicable[s];
      acts[s] = restart == 0 ? app[0] : app[rng_index(eng, static_cast<int>(app.size()))];
    }
    StationaryPolicy pi = StationaryPolicy::deterministic(shape, acts);

    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
      std::vector<ValueFunction> vfs(ib.models.size());
      for (size_t m = 0; m < ib.models.size(); ++m)
        vfs[m] = policy_evaluation(*ib.models[m], pi, cfg.tol);
      bool changed = false;
      for (int s = 0; s < shape.n_states; ++s) {
        const auto& app = shape.applicable[s];
        size_t best_slot = 0;
        double best_q = -std::numeric_limits<double>::infinity();
        for (size_t slot = 0; slot < app.size(); ++slot) {
          double q = frozen_q(ib, vfs, s, app[slot], shape.discount);
          if (q > best_q + 1e-12) {
            best_q = q;
            best_slot = slot;
          }
        }
        if (pi.slot_probs[s][best_slot] != 1.0) {
          pi.slot_probs[s].assign(app.size(), 0.0);
          pi.slot_probs[s][best_slot] = 1.0;
          changed = true;
        }
      }
      if (!changed) break;
    }

    double v = 0.0;
    for (size_t m = 0; m < ib.models.size(); ++m) {
      if (ib.weights[m] <= 0.0) continue;
      v += ib.weights[m] * policy_evaluation(*ib.models[m], pi, cfg.tol).v[query];
    }
    if (v > best_v) {
      best_v = v;
      best = pi;
    }
  }
  *best_value = best_v;
  return best;
}

}  // namespace

FiniteMdp mean_model(const PriorMixture& prior, const Belief& b) {
  const FiniteMdp& ref = prior.candidates[0];
  FiniteMdp m;
  m.n_states = ref.n_states;
  m.n_actions = ref.n_actions;
  m.discount = ref.discount;
  m.applicable = ref.applicable;
  m.initial_dist = ref.initial_dist;
  m.state_names = ref.state_names;
  m.action_names = ref.action_names;
  m.table.resize(ref.n_states);
  for (int s = 0; s < ref.n_states; ++s) {
    m.table[s].resize(ref.applicable[s].size());
    for (size_t slot = 0; slot < ref.applicable[s].size(); ++slot) {
      // Collect per-successor transition mass and reward mixtures.
      std::vector<double> mass(ref.n_states, 0.0);
      std::vector<std::vector<double>> vals(ref.n_states), ps(ref.n_states);
      for (int i = 0; i < prior.n_candidates(); ++i) {
        if (b.w[i] <= 0.0) continue;
        for (const auto& o : prior.candidates[i].table[s][slot]) {
          if (o.prob <= 0.0) continue;
          double w = b.w[i] * o.prob;
          mass[o.next] += w;
          for (size_t k = 0; k < o.reward.values.size(); ++k) {
            vals[o.next].push_back(o.reward.values[k]);
            ps[o.next].push_back(w * o.reward.probs[k]);
          }
        }
      }
      for (int next = 0; next < ref.n_states; ++next) {
        if (mass[next] <= 0.0) continue;
        for (double& p : ps[next]) p /= mass[next];
        m.table[s][slot].push_back({next, mass[next], RewardDist(vals[next], ps[next])});
      }
    }
  }
  return m;
}

InterpretedBelief interpret_belief(const PriorMixture& prior, const Belief& b, InterpMode mode) {
  if (b.w.size() != static_cast<size_t>(prior.n_candidates()))
    throw argument_error("belief length does not match the prior");
  InterpretedBelief ib;
  switch (mode) {
    case InterpMode::exact_posterior:
      for (int i = 0; i < prior.n_candidates(); ++i) {
        if (b.w[i] <= 0.0) continue;
        ib.models.push_back(&prior.candidates[i]);
        ib.weights.push_back(b.w[i]);
      }
      break;
    case InterpMode::mean_model:
      ib.synthesized = std::make_shared<FiniteMdp>(mean_model(prior, b));
      ib.models.push_back(ib.synthesized.get());
      ib.weights.push_back(1.0);
      break;
    case InterpMode::map_model: {
      int best = 0;
      for (int i = 1; i < prior.n_candidates(); ++i)
        if (b.w[i] > b.w[best]) best = i;
      ib.models.push_back(&prior.candidates[best]);
      ib.weights.push_back(1.0);
      break;
    }
  }
  return ib;
}

double ce_policy_value(const PriorMixture& prior, const Belief& b, InterpMode mode,
                       const StationaryPolicy& pi, StateId s, double tol) {
  InterpretedBelief ib = interpret_belief(prior, b, mode);
  double v = 0.0;
  for (size_t m = 0; m < ib.models.size(); ++m)
    v += ib.weights[m] * policy_evaluation(*ib.models[m], pi, tol).v[s];
  return v;
}

CeChoice ce_act(const PriorMixture& prior, const AugmentedState& aug, InterpMode mode,
                const CeSearchConfig& cfg, const PseudoReward* shaping) {
  InterpretedBelief ib = interpret_belief(prior, aug.belief, mode);
  const FiniteMdp& shape = *ib.models[0];

  CeChoice choice;
  double policy_count = count_deterministic_policies(shape);
  if (policy_count <= static_cast<double>(cfg.enumeration_limit)) {
    std::vector<StationaryPolicy> policies =
        enumerate_deterministic_policies(shape, cfg.enumeration_limit);
    double best = -std::numeric_limits<double>::infinity();
    for (StationaryPolicy& pi : policies) {
      double v;
      if (shaping == nullptr) {
        v = 0.0;
        for (size_t m = 0; m < ib.models.size(); ++m)
          v += ib.weights[m] * policy_evaluation(*ib.models[m], pi, cfg.tol).v[aug.s];
      } else {
        // Shaped objective: simulate the policy from aug. For non-exact
        // interpretations the simulation runs on the interpreted model
        // (degenerate synthetic prior) so beliefs stay frozen by construction.
        if (mode == InterpMode::exact_posterior) {
          FixedPolicyEval eval(prior, pi, shaping);
          AugmentedState start = aug;
          v = eval.value(start, cfg.shaped_horizon);
        } else {
          PriorMixture point;
          point.candidates = {*ib.models[0]};
          point.weights = {1.0};
          FixedPolicyEval eval(point, pi, shaping);
          AugmentedState start;
          start.s = aug.s;
          start.belief.w = {1.0};
          start.stats = aug.stats;
          v = eval.value(start, cfg.shaped_horizon);
        }
      }
      if (v > best + 1e-12) {
        best = v;
        choice.policy = pi;
      }
    }
    choice.value = best;
    choice.certified = true;
  } else {
    if (shaping != nullptr)
      throw capacity_error("shaped certainty-equivalent selection requires exhaustive "
                           "enumeration; policy count " +
                           std::to_string(policy_count) + " exceeds the limit");
    double best = 0.0;
    choice.policy = local_search_policy(ib, aug.s, cfg, &best);
    choice.value = best;
    choice.certified = false;
  }
  choice.action = choice.policy.action_at(shape, aug.s);
  return choice;
}

double ce_q_estimate(const PriorMixture& prior, const Belief& b, InterpMode mode, StateId s,
                     ActionId a, const CeSearchConfig& cfg) {
  InterpretedBelief ib = interpret_belief(prior, b, mode);
  const FiniteMdp& shape = *ib.models[0];
  if (shape.slot_of(s, a) < 0)
    throw argument_error("action " + shape.action_label(a) + " not applicable at " +
                         shape.state_label(s));

  std::vector<StationaryPolicy> policies =
      enumerate_deterministic_policies(shape, cfg.enumeration_limit);
  double best = -std::numeric_limits<double>::infinity();
  for (const StationaryPolicy& pi : policies) {
    std::vector<ValueFunction> vfs(ib.models.size());
    for (size_t m = 0; m < ib.models.size(); ++m)
      vfs[m] = policy_evaluation(*ib.models[m], pi, cfg.tol);
    best = std::max(best, frozen_q(ib, vfs, s, a, shape.discount));
  }
  return best;
}

PlanResult kstep_plan(const PriorMixture& prior, const AugmentedState& aug,
                      const PseudoReward* shaping, int k, double tie_tol) {
  return plan_finite_horizon(prior, aug, shaping, k, tie_tol);
}

Agent make_bayes_optimal_agent(const PlannerConfig& cfg, const PseudoReward* objective) {
  Agent ag;
  ag.name = objective == nullptr ? "bayes_optimal" : "bayes_optimal+" + objective->name;
  ag.deterministic = true;
  if (objective != nullptr) ag.objective = std::make_shared<PseudoReward>(*objective);
  auto obj = ag.objective;
  ag.act = [cfg, obj](const PriorMixture& prior, const AugmentedState& aug, std::mt19937_64*) {
    PlanResult res = plan_bayes_optimal(prior, aug, obj.get(), cfg);
    return res.optimal_action_set.front();
  };
  return ag;
}

Agent make_ce_agent(InterpMode mode, const CeSearchConfig& cfg, const PseudoReward* objective) {
  Agent ag;
  const char* tag = mode == InterpMode::exact_posterior ? "exact"
                    : mode == InterpMode::mean_model    ? "mean"
                                                        : "map";
  ag.name = std::string("ce_") + tag + (objective == nullptr ? "" : "+" + objective->name);
  ag.deterministic = true;
  if (objective != nullptr) ag.objective = std::make_shared<PseudoReward>(*objective);
  auto obj = ag.objective;
  ag.act = [mode, cfg, obj](const PriorMixture& prior, const AugmentedState& aug,
                            std::mt19937_64*) {
    return ce_act(prior, aug, mode, cfg, obj.get()).action;
  };
  return ag;
}

Agent make_kstep_agent(int k, const PseudoReward* objective, double tie_tol) {
  if (k < 0) throw argument_error("k must be nonnegative");
  Agent ag;
  ag.name = "kstep_" + std::to_string(k) + (objective == nullptr ? "" : "+" + objective->name);
  ag.deterministic = true;
  if (objective != nullptr) ag.objective = std::make_shared<PseudoReward>(*objective);
  auto obj = ag.objective;
  ag.act = [k, tie_tol, obj](const PriorMixture& prior, const AugmentedState& aug,
                             std::mt19937_64*) {
    int remaining = std::max(k - aug.depth, 0);
    PlanResult res = plan_finite_horizon(prior, aug, obj.get(), remaining, tie_tol);
    return res.optimal_action_set.front();
  };
  return ag;
}

Agent make_epsilon_greedy_agent(Agent base, double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw argument_error("epsilon must lie in [0, 1]");
  Agent ag;
  ag.name = "eps" + std::to_string(epsilon) + "_" + base.name;
  ag.deterministic = false;
  ag.objective = base.objective;
  auto inner = std::make_shared<Agent>(std::move(base));
  ag.act = [inner, epsilon](const PriorMixture& prior, const AugmentedState& aug,
                            std::mt19937_64* rng) {
    if (rng == nullptr) throw argument_error("stochastic agent needs an rng");
    const auto& acts = prior.applicable(aug.s);
    if (rng_unit(*rng) < epsilon) return acts[rng_index(*rng, static_cast<int>(acts.size()))];
    return inner->act(prior, aug, rng);
  };
  return ag;
}

Agent make_boltzmann_agent(InterpMode mode, double temperature, const CeSearchConfig& cfg) {
  if (!(temperature > 0.0)) throw argument_error("temperature must be positive");
  Agent ag;
  ag.name = "boltzmann_" + std::to_string(temperature);
  ag.deterministic = false;
  ag.act = [mode, temperature, cfg](const PriorMixture& prior, const AugmentedState& aug,
                                    std::mt19937_64* rng) {
    if (rng == nullptr) throw argument_error("stochastic agent needs an rng");
    const auto& acts = prior.applicable(aug.s);
    std::vector<double> qs(acts.size());
    for (size_t k = 0; k < acts.size(); ++k)
      qs[k] = ce_q_estimate(prior, aug.belief, mode, aug.s, acts[k], cfg);
    double qmax = *std::max_element(qs.begin(), qs.end());
    std::vector<double> w(acts.size());
    double total = 0.0;
    for (size_t k = 0; k < acts.size(); ++k) {
      w[k] = std::exp((qs[k] - qmax) / temperature);
      total += w[k];
    }
    double u = rng_unit(*rng) * total;
    for (size_t k = 0; k < acts.size(); ++k) {
      u -= w[k];
      if (u <= 0.0) return acts[k];
    }
    return acts.back();
  };
  return ag;
}

}  // namespace bampf
