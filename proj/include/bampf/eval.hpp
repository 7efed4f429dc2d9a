#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bampf/agents.hpp"
#include "bampf/planner.hpp"

namespace bampf {

struct TraceStep {
  StateId s = 0;
  ActionId a = 0;
  double r = 0.0;     // extrinsic reward
  double f = 0.0;     // pseudo-reward on this step (0 without shaping)
  StateId next = 0;
};

/**
 * One simulated episode. The belief snapshots satisfy beliefs[t] = posterior
 * before step t (so beliefs.size() == steps.size() + 1), and the returns are
 * recomputable from the step records: g = sum discount^t * r_t and
 * g_shaped = g + sum discount^t * f_t.
 */
struct Trace {
  std::uint64_t seed = 0;
  int model_index = -1;          // candidate the environment sampled
  std::vector<TraceStep> steps;
  std::vector<Belief> beliefs;
  double g = 0.0;
  double g_shaped = 0.0;
  double tail_bound = 0.0;       // discount^horizon * r_max/(1-discount)
};

/**
 * Simulate the agent for `horizon` steps against a candidate sampled from the
 * prior. Deterministic in the seed: the environment consumes one stream and
 * the agent an independent one derived from it. The agent is shown augmented
 * states carrying its own objective's statistic; `shaping` only determines
 * the recorded F values.
 */
Trace rollout_one(const PriorMixture& prior, const Agent& agent, const PseudoReward* shaping,
                  int horizon, std::uint64_t seed);

/** rollout_one per seed, optionally on `jobs` threads; order follows `seeds`. */
std::vector<Trace> rollout(const PriorMixture& prior, const Agent& agent,
                           const PseudoReward* shaping, int horizon,
                           const std::vector<std::uint64_t>& seeds, int jobs = 1);

struct ReturnEstimate {
  double g = 0.0;
  double g_shaped = 0.0;
  double half_width = 0.0;          // 99% normal-approx half-width on g (0 if exact)
  double half_width_shaped = 0.0;
  double tail_bound = 0.0;          // truncation bound on g
  double tail_bound_shaped = 0.0;   // truncation bound on g_shaped
  bool exact = false;
  std::int64_t samples = 0;         // exact: nodes expanded; mc: rollout count
};

/**
 * Exact expected finite-horizon return of a deterministic agent: the full
 * outcome tree is enumerated with memoization on (state, belief, statistics,
 * depth). Throws capacity_error once more than `node_limit` distinct nodes
 * expand, and argument_error for stochastic agents.
 */
ReturnEstimate expected_return_exact(const PriorMixture& prior, const Agent& agent,
                                     const PseudoReward* shaping, int horizon,
                                     std::int64_t node_limit = 1'000'000);

/** Monte-Carlo estimate over `samples` rollouts seeded seed_base, seed_base+1, ... */
ReturnEstimate expected_return_mc(const PriorMixture& prior, const Agent& agent,
                                  const PseudoReward* shaping, int horizon, int samples,
                                  std::uint64_t seed_base, int jobs = 1);

enum class RegretMethod { direct, pdl, both };

/**
 * Bayesian regret of an agent against the Bayes-optimal algorithm, by two
 * estimators. direct = E[optimal value] - E[agent return]. pdl follows the
 * performance-difference form: the discounted sum, along the agent's own
 * trajectory distribution, of how far each chosen action falls short of the
 * optimal action value at the visited augmented state. The two agree up to
 * the reported error accounting.
 */
struct RegretReport {
  double direct = 0.0;
  double pdl = 0.0;
  double per_step = 0.0;        // (1 - discount) * pdl: mean per-step shortfall
  double direct_bound = 0.0;    // truncation + planner error on `direct`
  double pdl_bound = 0.0;
  double half_width = 0.0;      // sampling half-width (Monte-Carlo runs only)
  double optimal_value = 0.0;   // E over initial states of the planned value
  double agent_value = 0.0;
  int horizon = 0;
  std::int64_t samples = 0;     // 0 = exact enumeration
};

RegretReport bayesian_regret(const PriorMixture& prior, const Agent& agent, int horizon,
                             const PlannerConfig& cfg, RegretMethod method = RegretMethod::both,
                             int samples = 0, std::uint64_t seed_base = 0,
                             std::int64_t node_limit = 1'000'000);

/**
 * Both halves of the shaping-invariance statement, checked by exact planning
 * at every reachable augmented state up to `depth` steps from the start: the
 * shaped and unshaped optimal action sets coincide (up to ties explained by
 * tie_tol plus the planners' error bounds), and the shaped optimal value
 * equals the unshaped one minus the potential at that state.
 */
struct Theorem1Report {
  bool action_sets_match = true;
  bool value_shift_matches = true;
  int states_checked = 0;
  double max_action_violation = 0.0;   // worst unexplained set disagreement
  double max_shift_error = 0.0;        // worst |shaped + phi - unshaped|
  double shift_tolerance = 0.0;        // largest tolerance used in the shift check
  bool pass() const { return action_sets_match && value_shift_matches; }
};

Theorem1Report verify_theorem1(const PriorMixture& prior, const Potential& potential,
                               const PlannerConfig& cfg, int depth = 2);

struct BoundReport {
  std::string name;          // cor2 | cor3 | kstep_lemma | d_horizon
  std::string instance;
  double measured = 0.0;     // d_horizon: the resulting k
  double bound = 0.0;        // d_horizon: the resolution d
  double slack = 0.0;        // error accounting added to the bound
  bool satisfied = false;
  int k = 0;
  double phi_max = 0.0;
  double r_max = 0.0;
  double discount = 0.0;
};

/**
 * Shaping a BAMDP with a potential-based pseudo-reward leaves every agent's
 * regret unchanged: |shaped regret - unshaped regret| is bounded by the
 * truncation/planner slack. Exact enumeration; deterministic agents only.
 */
BoundReport verify_bound_cor2(const PriorMixture& prior, const Potential& potential,
                              const Agent& agent, int horizon, const PlannerConfig& cfg);

/**
 * Regret of the agent that maximizes the k-step shaped return is at most
 * 2 discount^k (phi_max + r_max discount/(1-discount)).
 */
BoundReport verify_bound_cor3(const PriorMixture& prior, const Potential& potential, int k,
                              int horizon, const PlannerConfig& cfg);

/**
 * The same agent's k-step extrinsic return is within 2 discount^k phi_max of
 * the unshaped k-step optimum (exact finite-horizon quantities on both sides).
 */
BoundReport verify_bound_kstep(const PriorMixture& prior, const Potential& potential, int k,
                               const PlannerConfig& cfg);

/** Smallest k with 2 discount^k phi_max < d: where shaping stops mattering. */
BoundReport verify_d_horizon(double phi_max, double d, double discount);

}  // namespace bampf
