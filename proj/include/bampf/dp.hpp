#pragma once

#include <cstdint>
#include <vector>

#include "bampf/mdp.hpp"

namespace bampf {

/** State values plus per-slot action values for one MDP. */
struct ValueFunction {
  std::vector<double> v;                    // [s]
  std::vector<std::vector<double>> q;       // [s][slot]
};

/**
 * Evaluate a stationary policy. Uses a direct linear solve of
 * (I - discount P_pi) v = r_pi for up to 1000 states, otherwise iterative
 * sweeps stopped once the sup-norm step times discount/(1-discount) is <= tol.
 * The returned values satisfy a sup-norm Bellman residual <= tol.
 */
ValueFunction policy_evaluation(const FiniteMdp& m, const StationaryPolicy& pi,
                                double tol = 1e-9);

struct ViResult {
  ValueFunction vf;
  StationaryPolicy greedy;    // ties broken toward the lowest action id
  int iterations = 0;
};

/** Optimal values by value iteration with the discount-contraction stop rule. */
ViResult value_iteration(const FiniteMdp& m, double tol = 1e-9);

/** Number of deterministic policies (product of applicable-set sizes). */
double count_deterministic_policies(const FiniteMdp& m);

/**
 * All deterministic policies in lexicographic order of their action tuples
 * (last state varies fastest). Throws capacity_error naming the count when it
 * exceeds `limit`.
 */
std::vector<StationaryPolicy> enumerate_deterministic_policies(const FiniteMdp& m,
                                                               std::uint64_t limit);

/**
 * Finite-episode product construction: wrapped state (s, k) with step index
 * k in [0, episode_length). Wrapped index = k * n_states + s. At
 * k = episode_length - 1 every action resets through the initial distribution
 * with the step index returning to 0; the reward distribution on every edge is
 * the base MDP's distribution for (s, a, physical landing state).
 */
FiniteMdp episodic_wrapper(const FiniteMdp& m, int episode_length);

}  // namespace bampf
