#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "bampf/dp.hpp"
#include "bampf/planner.hpp"

namespace bampf {

/** How an agent turns the posterior into models it can evaluate. */
enum class InterpMode { exact_posterior, mean_model, map_model };

/**
 * Evaluation view of a belief: a weighted list of MDPs. exact_posterior keeps
 * every supported candidate, mean_model synthesizes the single weight-averaged
 * MDP, map_model keeps the highest-weight candidate (ties toward the lowest
 * index).
 */
struct InterpretedBelief {
  std::vector<const FiniteMdp*> models;
  std::vector<double> weights;
  std::shared_ptr<FiniteMdp> synthesized;   // owns the mean model when used
};

InterpretedBelief interpret_belief(const PriorMixture& prior, const Belief& b, InterpMode mode);

/** Weight-averaged MDP of the belief (transitions and reward mixtures). */
FiniteMdp mean_model(const PriorMixture& prior, const Belief& b);

struct CeSearchConfig {
  std::uint64_t enumeration_limit = 4096;  // exhaustive below this policy count
  int restarts = 4;                        // local-search restarts above it
  int max_sweeps = 500;
  std::uint64_t rng_seed = 0;
  double tol = 1e-9;
  // Horizon for fixed-policy evaluation when a shaped objective is attached.
  int shaped_horizon = 200;
};

/**
 * Frozen-belief value of following a stationary policy: the belief-weighted
 * average of the policy's value in each interpreted model.
 */
double ce_policy_value(const PriorMixture& prior, const Belief& b, InterpMode mode,
                       const StationaryPolicy& pi, StateId s, double tol = 1e-9);

struct CeChoice {
  ActionId action = 0;
  StationaryPolicy policy;
  double value = 0.0;
  bool certified = true;   // exhaustive enumeration (vs local-search fallback)
};

/**
 * Pick the stationary policy maximizing the frozen-belief value at aug.s and
 * return its action there. Enumerates every deterministic policy when their
 * count is within the limit; otherwise runs best-response sweeps with seeded
 * restarts and flags the result non-certified. With `shaping` attached the
 * selection objective becomes the fixed-policy shaped value from aug (the
 * statistic evolves along simulated experience, beliefs stay frozen per mode).
 */
CeChoice ce_act(const PriorMixture& prior, const AugmentedState& aug, InterpMode mode,
                const CeSearchConfig& cfg = {}, const PseudoReward* shaping = nullptr);

/**
 * Frozen-belief action value: max over stationary policies of
 * E_b[one-step reward + discount * V^pi(next state)], candidate-consistent.
 */
double ce_q_estimate(const PriorMixture& prior, const Belief& b, InterpMode mode, StateId s,
                     ActionId a, const CeSearchConfig& cfg = {});

/**
 * Exact k-step lookahead value (zero terminal value, no tail bootstrap):
 * the k-step objective itself. k = 0 ties every applicable action at 0.
 */
PlanResult kstep_plan(const PriorMixture& prior, const AugmentedState& aug,
                      const PseudoReward* shaping, int k, double tie_tol = 1e-6);

/**
 * An agent maps augmented states to actions. Stochastic agents require the
 * rng; deterministic ones ignore it. `objective` is the shaping the agent
 * optimizes (never revealed to it as extra belief state); evaluators maintain
 * the matching statistic inside the augmented states they pass in.
 */
struct Agent {
  std::string name;
  bool deterministic = true;
  std::shared_ptr<const PseudoReward> objective;
  std::function<ActionId(const PriorMixture&, const AugmentedState&, std::mt19937_64*)> act;
};

Agent make_bayes_optimal_agent(const PlannerConfig& cfg, const PseudoReward* objective = nullptr);
Agent make_ce_agent(InterpMode mode, const CeSearchConfig& cfg = {},
                    const PseudoReward* objective = nullptr);
Agent make_kstep_agent(int k, const PseudoReward* objective = nullptr, double tie_tol = 1e-6);
/** Follow the base agent w.p. 1-epsilon, otherwise a uniform applicable action. */
Agent make_epsilon_greedy_agent(Agent base, double epsilon);
/** Sample actions with probability proportional to exp(ce_q / temperature). */
Agent make_boltzmann_agent(InterpMode mode, double temperature, const CeSearchConfig& cfg = {});

}  // namespace bampf
