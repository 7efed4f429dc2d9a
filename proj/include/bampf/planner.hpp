#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bampf/belief.hpp"
#include "bampf/shaping.hpp"

namespace bampf {

/**
 * Physical state plus everything the planner conditions on: the posterior,
 * the shaping statistic of the history and the number of steps taken so far.
 */
struct AugmentedState {
  StateId s = 0;
  Belief belief;
  StatValue stats;
  int depth = 0;
};

/** Root augmented state at physical state s (prior belief, fresh statistic). */
AugmentedState initial_augmented_state(const PriorMixture& prior, StateId s,
                                       const PseudoReward* shaping = nullptr);

struct PlannerConfig {
  int horizon = 0;                  // number of expanded reward layers
  double tie_tol = 1e-6;            // actions within tie_tol of the max tie
  bool use_collapse_shortcut = true;
  double r_max = 0.0;               // must dominate every |reward| in the prior
  std::optional<double> phi_max;    // override for the claimed potential bound
  double vi_tol = 1e-10;            // accuracy of collapse-shortcut values
  std::uint64_t node_limit = 50'000'000;

  // r_max filled from the prior, horizon chosen so the unshaped tail bound
  // discount^horizon * r_max/(1-discount) drops below `tail`.
  static PlannerConfig for_prior(const PriorMixture& prior, double tail = 1e-6);
};

struct PlanResult {
  double value = 0.0;
  std::vector<std::pair<ActionId, double>> action_values;   // root Q, ascending id
  std::vector<ActionId> optimal_action_set;                 // within tie_tol of max
  double error_bound = 0.0;   // rigorous bound on |value - exact|, also per Q
  std::uint64_t nodes = 0;
};

/** One weighted successor of (aug, a): posterior, statistic and depth advanced. */
struct Successor {
  AugmentedState aug;
  double prob = 0.0;
  double reward = 0.0;    // realized extrinsic reward on this edge
  double f_value = 0.0;   // pseudo-reward on this edge (0 without shaping)
};

/**
 * Enumerate the joint (next state, reward) outcomes with positive mixture
 * probability, in ascending (state, reward) order. Probabilities sum to 1.
 */
std::vector<Successor> successor_distribution(const PriorMixture& prior,
                                              const AugmentedState& aug, ActionId a,
                                              const PseudoReward* shaping = nullptr);

/**
 * Depth-limited expectimax over the belief-augmented MDP with memoization on
 * (state, canonical belief, statistic, remaining depth). Leaves value 0 and
 * carry a rigorous discounted tail bound; when the belief is degenerate and
 * shaping is absent or carries a claimed bounded potential, subtrees are
 * answered exactly by value iteration on the realized MDP (minus the
 * potential of the entering history, which is all that survives of the
 * telescoped shaping tail). When `shaping` is given, edge rewards become
 * extrinsic + F and the reported value is the shaped value.
 */
PlanResult plan_bayes_optimal(const PriorMixture& prior, const AugmentedState& aug,
                              const PseudoReward* shaping, const PlannerConfig& cfg);

/**
 * Exact finite-horizon variant: value of the best behavior over exactly k
 * transitions with zero terminal value. This is the k-step objective itself,
 * so the error bound is 0 and no infinite-tail shortcut is used. k = 0 yields
 * value 0 with every applicable action tied.
 */
PlanResult plan_finite_horizon(const PriorMixture& prior, const AugmentedState& aug,
                               const PseudoReward* shaping, int k, double tie_tol = 1e-6,
                               std::uint64_t node_limit = 50'000'000);

struct Decomposition {
  double total = 0.0;   // value of planning with the current posterior
  double voo = 0.0;     // value of acting from the prior belief at this state
  double voi = 0.0;     // total - voo; may be negative
  double total_bound = 0.0;
  double voo_bound = 0.0;
  double voi_bound = 0.0;     // total_bound + voo_bound
  bool negative_voi = false;  // flagged, never clamped
};

/** Split the unshaped optimal value at aug into value of information/opportunity. */
Decomposition decompose_value(const PriorMixture& prior, const AugmentedState& aug,
                              const PlannerConfig& cfg);

}  // namespace bampf
