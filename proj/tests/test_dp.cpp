#include "doctest.h"

#include <cmath>
#include <vector>

#include "bampf/dp.hpp"
#include "bampf/envs.hpp"
#include "bampf/errors.hpp"
#include "bampf/mdp.hpp"

using namespace bampf;

namespace {

// Deterministic chain 0 -> 1 -> 2(absorbing, pays 1 per step) with a costly
// shortcut action at state 0.
FiniteMdp chain3() {
  FiniteMdp m = FiniteMdp::shell(3, 2, 0.5);
  m.table[0][0] = {{1, 1.0, RewardDist::point(0.0)}};   // walk
  m.table[0][1] = {{2, 1.0, RewardDist::point(-1.0)}};  // jump
  m.table[1][0] = {{2, 1.0, RewardDist::point(0.0)}};
  m.table[1][1] = {{0, 1.0, RewardDist::point(0.0)}};
  m.table[2][0] = {{2, 1.0, RewardDist::point(1.0)}};
  m.table[2][1] = {{2, 1.0, RewardDist::point(1.0)}};
  return m;
}

}  // namespace

TEST_CASE("policy evaluation matches geometric-series closed forms") {
  Environment env = make_benchmark("caterpillar");
  const FiniteMdp& full = env.prior.candidates[0];
  const FiniteMdp& empty = env.prior.candidates[1];

  // Stay at the weed forever: 21 / (1 - 0.95).
  StationaryPolicy stay = StationaryPolicy::deterministic(full, {0, 0});
  CHECK(policy_evaluation(full, stay).v[0] == doctest::Approx(420.0).epsilon(1e-10));
  CHECK(policy_evaluation(empty, stay).v[0] == doctest::Approx(420.0).epsilon(1e-10));

  // Go then harvest the bush forever.
  StationaryPolicy go_stay = StationaryPolicy::deterministic(full, {1, 0});
  double full_bush = 150.0 / 0.05;  // 3000
  CHECK(policy_evaluation(full, go_stay).v[1] == doctest::Approx(full_bush).epsilon(1e-10));
  CHECK(policy_evaluation(full, go_stay).v[0] ==
        doctest::Approx(-5.0 + 0.95 * full_bush).epsilon(1e-10));
  CHECK(policy_evaluation(empty, go_stay).v[0] == doctest::Approx(-5.0).epsilon(1e-10));

  // Ping-pong between the plants: -5 every step.
  StationaryPolicy pingpong = StationaryPolicy::deterministic(full, {1, 1});
  CHECK(policy_evaluation(full, pingpong).v[0] == doctest::Approx(-100.0).epsilon(1e-10));
}

TEST_CASE("policy evaluation fills per-slot action values consistently") {
  FiniteMdp m = chain3();
  StationaryPolicy walk = StationaryPolicy::deterministic(m, {0, 0, 0});
  ValueFunction vf = policy_evaluation(m, walk);
  // v2 = 1/(1-0.5) = 2, v1 = 0.5*2 = 1, v0(walk) = 0.5*1.
  CHECK(vf.v[2] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(vf.v[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vf.v[0] == doctest::Approx(0.5).epsilon(1e-12));
  // One-step lookahead on the fixed continuation values.
  CHECK(vf.q[0][0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(vf.q[0][1] == doctest::Approx(-1.0 + 0.5 * 2.0).epsilon(1e-12));
  CHECK(vf.q[1][1] == doctest::Approx(0.5 * 0.5).epsilon(1e-12));
}

TEST_CASE("value iteration finds the optimal chain policy and greedy ties go low") {
  FiniteMdp m = chain3();
  ViResult res = value_iteration(m, 1e-12);
  // Walking beats jumping: 0.5 vs 0.
  CHECK(res.vf.v[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(res.greedy.action_at(m, 0) == 0);
  CHECK(res.greedy.action_at(m, 2) == 0);  // both actions tie at the sink
  CHECK(res.iterations > 0);

  // Against exhaustive policy search.
  double best = -1e100;
  for (const auto& pi : enumerate_deterministic_policies(m, 100))
    best = std::max(best, policy_evaluation(m, pi).v[0]);
  CHECK(res.vf.v[0] == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("value iteration respects its sup-norm guarantee on the caterpillar") {
  Environment env = make_benchmark("caterpillar");
  const FiniteMdp& full = env.prior.candidates[0];
  ViResult res = value_iteration(full, 1e-9);
  CHECK(std::fabs(res.vf.v[1] - 3000.0) <= 1e-6);
  CHECK(res.greedy.action_at(full, 1) == 0);
}

TEST_CASE("deterministic policy counting multiplies applicable-set sizes") {
  FiniteMdp m = chain3();
  CHECK(count_deterministic_policies(m) == 8.0);
  m.applicable[1] = {0};
  m.table[1] = {{{2, 1.0, RewardDist::point(0.0)}}};
  CHECK(count_deterministic_policies(m) == 4.0);
}

TEST_CASE("policy enumeration is lexicographic with the last state fastest") {
  FiniteMdp m = chain3();
  std::vector<StationaryPolicy> all = enumerate_deterministic_policies(m, 8);
  REQUIRE(all.size() == 8);
  std::vector<std::vector<ActionId>> tuples;
  for (const auto& pi : all)
    tuples.push_back({pi.action_at(m, 0), pi.action_at(m, 1), pi.action_at(m, 2)});
  CHECK(tuples.front() == std::vector<ActionId>{0, 0, 0});
  CHECK(tuples[1] == std::vector<ActionId>{0, 0, 1});
  CHECK(tuples[2] == std::vector<ActionId>{0, 1, 0});
  CHECK(tuples.back() == std::vector<ActionId>{1, 1, 1});
}

TEST_CASE("policy enumeration over the limit reports the true count") {
  FiniteMdp m = chain3();
  try {
    enumerate_deterministic_policies(m, 7);
    FAIL("expected capacity_error");
  } catch (const capacity_error& e) {
    CHECK(std::string(e.what()).find("8") != std::string::npos);
  }
}

TEST_CASE("episodic wrapper lays out (step, state) pairs and resets at the end") {
  FiniteMdp m = chain3();
  FiniteMdp w = episodic_wrapper(m, 3);
  REQUIRE_NOTHROW(w.validate());
  CHECK(w.n_states == 9);
  CHECK(w.discount == m.discount);

  // Index layout: k * n_states + s. Interior steps advance k.
  CHECK(w.transition_prob(0 * 3 + 0, 0, 1 * 3 + 1) == 1.0);
  CHECK(w.transition_prob(1 * 3 + 1, 0, 2 * 3 + 2) == 1.0);
  // Final step resets through the initial distribution (point mass on 0).
  CHECK(w.transition_prob(2 * 3 + 2, 0, 0 * 3 + 0) == 1.0);
  // The reset edge pays the base reward of the physical landing before the
  // reset, so the sink keeps paying 1 on its final step.
  CHECK(w.reward_on(2 * 3 + 2, 0, 0).mean() == 1.0);
  CHECK(w.reward_on(0, 1, 1 * 3 + 2).mean() == -1.0);

  // Initial distribution lives on step 0.
  CHECK(w.initial_dist[0] == 1.0);
  for (int i = 1; i < 9; ++i) CHECK(w.initial_dist[i] == 0.0);
}

TEST_CASE("episodic wrapper on a stochastic reset mixes the initial distribution") {
  FiniteMdp m = chain3();
  m.initial_dist = {0.25, 0.75, 0.0};
  FiniteMdp w = episodic_wrapper(m, 2);
  REQUIRE_NOTHROW(w.validate());
  // From the last step, action walk at physical state 0 lands physically at 1,
  // then resets: successor distribution equals the initial distribution.
  CHECK(w.transition_prob(1 * 3 + 0, 0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(w.transition_prob(1 * 3 + 0, 0, 1) == doctest::Approx(0.75).epsilon(1e-15));
}
