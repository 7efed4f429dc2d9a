#pragma once

#include <string>
#include <vector>

#include "bampf/errors.hpp"

namespace bampf {

using StateId = int;
using ActionId = int;

/**
 * Finite discrete reward distribution: a list of (value, probability) pairs.
 * Values are kept sorted and deduplicated so that two distributions over the
 * same outcomes compare equal and likelihoods are exact.
 */
struct RewardDist {
  std::vector<double> values;
  std::vector<double> probs;

  RewardDist() = default;
  RewardDist(std::vector<double> vals, std::vector<double> ps);

  static RewardDist point(double v) { return RewardDist({v}, {1.0}); }

  double mean() const;
  double max_abs() const;
  // Probability mass on exactly `v` (0 if `v` is not a support point).
  double prob_of(double v) const;

  bool operator==(const RewardDist&) const = default;
};

/**
 * Tabular MDP with per-state applicable-action subsets.
 *
 * Actions live in a global universe 0..n_actions-1; each state lists the
 * subset that is applicable there (sorted ascending). Transition and reward
 * tables are indexed [state][slot] where slot is the position of the action
 * in applicable[state].
 */
struct FiniteMdp {
  struct Outcome {
    StateId next = 0;
    double prob = 0.0;
    RewardDist reward;
  };

  int n_states = 0;
  int n_actions = 0;
  std::vector<std::vector<ActionId>> applicable;           // [s] -> sorted action ids
  std::vector<std::vector<std::vector<Outcome>>> table;    // [s][slot] -> outcomes
  std::vector<double> initial_dist;                        // over states
  double discount = 0.0;

  std::vector<std::string> state_names;                    // optional labels
  std::vector<std::string> action_names;

  // Shell with every action applicable everywhere and empty outcome lists.
  static FiniteMdp shell(int n_states, int n_actions, double discount);

  int slot_of(StateId s, ActionId a) const;                // -1 when not applicable
  const std::vector<Outcome>& outcomes(StateId s, ActionId a) const;
  double transition_prob(StateId s, ActionId a, StateId next) const;
  // Distribution of the reward emitted on (s, a, next); zero-point if absent.
  RewardDist reward_on(StateId s, ActionId a, StateId next) const;
  double expected_reward(StateId s, ActionId a) const;
  double max_abs_reward() const;
  std::string state_label(StateId s) const;
  std::string action_label(ActionId a) const;

  // Throws validation_error unless rows are stochastic within tol, indices are
  // in range, applicable lists are sorted/nonempty and reward probs sum to 1.
  void validate(double tol = 1e-12) const;
};

/**
 * Stationary (possibly stochastic) policy over an MDP's applicable slots.
 * slot_probs[s][k] is the probability of applicable[s][k].
 */
struct StationaryPolicy {
  std::vector<std::vector<double>> slot_probs;

  static StationaryPolicy deterministic(const FiniteMdp& m, const std::vector<ActionId>& actions);
  bool is_deterministic() const;
  // For deterministic policies: the chosen global action id at s.
  ActionId action_at(const FiniteMdp& m, StateId s) const;
  void validate(const FiniteMdp& m, double tol = 1e-12) const;
};

}  // namespace bampf
