#pragma once

#include <cstdint>
#include <vector>

#include "bampf/mdp.hpp"

namespace bampf {

/**
 * Finite prior over candidate MDPs. All candidates must share the state space,
 * action universe, applicable-action sets, discount and initial distribution;
 * they may differ in transition probabilities and reward distributions.
 */
struct PriorMixture {
  std::vector<FiniteMdp> candidates;
  std::vector<double> weights;
  std::string name;

  int n_candidates() const { return static_cast<int>(candidates.size()); }
  int n_states() const { return candidates.empty() ? 0 : candidates[0].n_states; }
  int n_actions() const { return candidates.empty() ? 0 : candidates[0].n_actions; }
  double discount() const { return candidates.empty() ? 0.0 : candidates[0].discount; }
  const std::vector<double>& initial_dist() const { return candidates[0].initial_dist; }
  const std::vector<ActionId>& applicable(StateId s) const { return candidates[0].applicable[s]; }
  double max_abs_reward() const;
  std::string state_label(StateId s) const { return candidates[0].state_label(s); }
  std::string action_label(ActionId a) const { return candidates[0].action_label(a); }

  void validate() const;
};

/**
 * Posterior over the prior's candidates, kept in canonical form: weights sum
 * to 1 and entries below 1e-15 are clamped to exact zero (then renormalized),
 * so beliefs reached by replaying the same history compare bitwise equal.
 */
struct Belief {
  std::vector<double> w;

  static Belief from_prior(const PriorMixture& prior);
  void canonicalize();
  // True when a single candidate carries all mass; *which receives its index.
  bool degenerate(int* which = nullptr) const;
  double entropy() const;   // natural-log Shannon entropy

  bool operator==(const Belief&) const = default;
};

/**
 * Observation history s0, (a1, r1, s1), (a2, r2, s2), ...
 * The posterior is a deterministic fold over the steps.
 */
struct History {
  struct Step {
    ActionId a = 0;
    double r = 0.0;
    StateId s = 0;
  };
  StateId s0 = 0;
  std::vector<Step> steps;

  StateId current_state() const { return steps.empty() ? s0 : steps.back().s; }
  int length() const { return static_cast<int>(steps.size()); }
  History extended(ActionId a, double r, StateId s) const;
  // Fold the posterior from the prior over every step (replay semantics).
  Belief replay_posterior(const PriorMixture& prior) const;
  void validate(const PriorMixture& prior) const;
};

/**
 * One Bayes step: w'_i proportional to w_i * T_i(s'|s,a) * R_i(r|s,a,s').
 * Throws impossible_evidence_error when the total likelihood is zero.
 */
Belief posterior_update(const PriorMixture& prior, const Belief& b, StateId s, ActionId a,
                        double r, StateId s_next);

/** Mixture-mean one-step reward under the belief. */
double mixture_expected_reward(const PriorMixture& prior, const Belief& b, StateId s, ActionId a);

/** Posterior-predictive probability of landing in s_next (states only). */
double predictive_state_prob(const PriorMixture& prior, const Belief& b, StateId s, ActionId a,
                             StateId s_next);

/** Posterior-predictive probability of observing (r, s_next) jointly. */
double predictive_joint_prob(const PriorMixture& prior, const Belief& b, StateId s, ActionId a,
                             double r, StateId s_next);

}  // namespace bampf
