#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bampf/belief.hpp"

namespace bampf {

/** Optional structure the benchmark constructors attach for shaping/demos. */
struct EnvAnnotations {
  std::vector<double> phi_table;       // per-state potential (goal-distance grids)
  std::vector<int> subgoals;           // designated subgoal states
  std::vector<StateId> tv_states;      // channel-bearing states (noisy tv)
  std::optional<StateId> goal_state;
  std::optional<int> episode_length;   // present when episodically wrapped

  bool operator==(const EnvAnnotations&) const = default;
};

struct Environment {
  PriorMixture prior;
  EnvAnnotations annotations;
};

struct BenchmarkParams {
  int width = 5;
  int height = 5;
  int goal_x = -1;            // grids: goal cell, -1 = far corner
  int goal_y = -1;
  int corridor_len = 4;       // noisy_tv
  int channels = 8;           // noisy_tv
  double r_prime = 0.0;       // necessity: common branch reward
  double delta = 1.0;         // necessity: induced action-value gap * 2
  double discount = -1.0;     // override; -1 keeps each benchmark's default
};

/**
 * Named instances:
 *   caterpillar  two plants, two candidate bushes; the worked example
 *   goal_grid    deterministic 4-neighbor grid, absorbing goal paying 1/step
 *   unique_grid  goal_grid wrapped into 50-step episodes
 *   noisy_tv     corridor to a goal with one uniformly-resampled channel cell
 *   noisy_coin   one state, two candidates disagreeing on a +/-1 reward coin
 *   necessity    the three-state instance whose two arms differ by delta/2
 */
Environment make_benchmark(const std::string& name, const BenchmarkParams& params = {});

/** Names accepted by make_benchmark, in documentation order. */
const std::vector<std::string>& benchmark_names();

/** Serialize to the JSON environment-spec document (schema_version 1). */
std::string save_env_spec(const Environment& env);

/** Parse and fully validate a spec document; errors name the offending path. */
Environment load_env_spec(const std::string& text);

struct RandomBamdpParams {
  int n_states = 4;
  int n_actions = 2;
  int n_candidates = 3;
  int reward_levels = 5;      // odd count centered on 0: {-2,-1,0,1,2} * scale
  double reward_scale = 1.0;
  double discount = 0.95;
  double branch_prob = 0.5;   // chance a (state, action) row has two successors
};

/**
 * Deterministic-in-seed random prior for property campaigns. Candidates share
 * one transition structure and differ only in deterministic grid rewards, so
 * posteriors stay exact and the reachable belief set stays small enough for
 * exact planning. Sizes are capped at 8 states / 4 actions / 4 candidates.
 */
PriorMixture gen_random_bamdp(std::uint64_t seed, const RandomBamdpParams& params = {});

}  // namespace bampf
