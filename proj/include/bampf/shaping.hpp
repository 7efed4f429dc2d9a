#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bampf/belief.hpp"

namespace bampf {

/**
 * Value of a shaping statistic. Must be cheap to copy, equality-comparable
 * and hashable so augmented states can key planner memo tables.
 */
using StatValue = std::variant<std::monostate, std::int64_t, double, std::vector<std::int64_t>>;

std::size_t hash_stat(const StatValue& v);

/**
 * One BAMDP transition as seen by shaping code. Beliefs are the posteriors
 * immediately before and after the step. `absorbing` marks steps along the
 * synthesized absorbing extension used by the certifier: those transitions
 * are deterministic, reward-free and carry no information, so predictive
 * probabilities along them are exactly 1.
 */
struct StepContext {
  const PriorMixture* prior = nullptr;
  const Belief* belief_before = nullptr;
  StateId s = 0;
  ActionId a = 0;
  double r = 0.0;
  StateId s_next = 0;
  const Belief* belief_after = nullptr;
  bool absorbing = false;
};

/**
 * A named sufficient statistic of the history. `initial` evaluates the
 * statistic of the length-zero history starting at a given state; `update`
 * folds one transition. `stationary_after_collapse` declares that once the
 * belief is degenerate the potential built on this statistic stays constant
 * along every continuation.
 */
struct ShapingStatistic {
  std::string name;
  std::function<StatValue(const PriorMixture&, StateId)> initial;
  std::function<StatValue(const StatValue&, const StepContext&)> update;
  bool stationary_after_collapse = false;
};

/** Bounded potential over histories, evaluated through its statistic. */
struct Potential {
  ShapingStatistic statistic;
  // phi(statistic, posterior, current physical state)
  std::function<double(const StatValue&, const Belief&, StateId, const PriorMixture&)> phi;
  double phi_max = 0.0;   // bound on |phi| over reachable statistics

  double at(const PriorMixture& prior, const StatValue& st, const Belief& b, StateId s) const {
    return phi(st, b, s, prior);
  }
};

/**
 * History-dependent pseudo-reward F added to the extrinsic reward of the
 * transition that produced the history. `claimed_potential` is present when
 * the pseudo-reward is offered as potential-based; the certifier checks the
 * claim instead of reconstructing a potential from scratch.
 */
struct PseudoReward {
  std::string name;
  ShapingStatistic statistic;
  std::function<double(const StatValue& before, const StepContext&, const StatValue& after)> f;
  double f_max = 0.0;     // bound on |F| over realizable transitions
  std::optional<Potential> claimed_potential;
};

/**
 * Potential-based pseudo-reward F(h_t) = discount * phi(h_t) - phi(h_{t-1}),
 * with f_max = (1 + discount) * phi_max and the potential attached as claimed.
 */
PseudoReward make_bampf(Potential potential, double discount);

/** Parameters for the built-in pseudo-rewards. */
struct BuiltinParams {
  double scale = 1.0;                 // multiplies phi (and F) throughout
  std::vector<double> phi_table;      // state_potential_pbsf: per-state values
  std::vector<int> subgoals;          // subgoal_count: designated states
  int state_modulo = 0;               // unique_state_count: project state ids
                                      // through id % state_modulo when > 0
  double min_predictive_prob = 1e-6;  // negative_surprise: clamp floor for the
                                      // predictive probability inside the log
};

/**
 * Built-in pseudo-rewards by name:
 *   state_potential_pbsf  classic state-potential shaping lifted to histories
 *   unique_state_count    phi = number of distinct states visited
 *   information_gain      phi = -entropy(posterior)
 *   entropy_bonus         phi = empirical action entropy H(a|s) from counts
 *   subgoal_count         phi = number of designated subgoal states reached
 *   negative_surprise     phi = log posterior-predictive prob of the latest
 *                         state (clamped); lower at unpredictable states
 *   prediction_error      F = -log posterior-predictive prob of the observed
 *                         (reward, next state); not potential-based
 * All scaled by params.scale. Statistics size their universes to one extra
 * state and action so certifier extensions stay in range.
 */
PseudoReward make_builtin(const std::string& name, const PriorMixture& prior,
                          const BuiltinParams& params = {});

/** Names accepted by make_builtin, in documentation order. */
const std::vector<std::string>& builtin_names();

}  // namespace bampf
