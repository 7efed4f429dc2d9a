#include "doctest.h"

#include <string>
#include <utility>
#include <vector>

#include "bampf/envs.hpp"
#include "bampf/errors.hpp"
#include "bampf/mdp.hpp"

using namespace bampf;

namespace {

// Small two-state MDP used by several cases below.
FiniteMdp two_state() {
  FiniteMdp m = FiniteMdp::shell(2, 2, 0.9);
  m.table[0][0] = {{1, 1.0, RewardDist::point(1.0)}};
  m.table[0][1] = {{0, 1.0, RewardDist::point(0.0)}};
  m.table[1][0] = {{0, 0.5, RewardDist::point(2.0)}, {1, 0.5, RewardDist::point(-1.0)}};
  m.table[1][1] = {{1, 1.0, RewardDist::point(0.5)}};
  return m;
}

std::string validate_message(const FiniteMdp& m) {
  try {
    m.validate();
  } catch (const validation_error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("reward distributions sort, merge duplicates and answer point queries") {
  RewardDist r({2.0, -1.0, 2.0}, {0.25, 0.5, 0.25});
  CHECK(r.values == std::vector<double>{-1.0, 2.0});
  CHECK(r.probs == std::vector<double>{0.5, 0.5});
  CHECK(r.mean() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.max_abs() == 2.0);
  CHECK(r.prob_of(2.0) == 0.5);
  CHECK(r.prob_of(3.0) == 0.0);

  RewardDist p = RewardDist::point(7.0);
  CHECK(p.values == std::vector<double>{7.0});
  CHECK(p.mean() == 7.0);
  CHECK(p.max_abs() == 7.0);
}

TEST_CASE("reward distribution constructor rejects malformed input") {
  CHECK_THROWS_AS(RewardDist({1.0, 2.0}, {0.5}), argument_error);
  CHECK_THROWS_AS(RewardDist({}, {}), argument_error);
  CHECK_THROWS_AS(RewardDist({1.0}, {-0.1}), argument_error);
}

TEST_CASE("max_abs ignores zero-probability support points") {
  RewardDist r({-100.0, 1.0}, {0.0, 1.0});
  CHECK(r.max_abs() == 1.0);
}

TEST_CASE("slot lookup distinguishes applicable from inapplicable actions") {
  FiniteMdp m = two_state();
  m.applicable[1] = {1};
  m.table[1] = {{{1, 1.0, RewardDist::point(0.5)}}};
  REQUIRE_NOTHROW(m.validate());
  CHECK(m.slot_of(0, 0) == 0);
  CHECK(m.slot_of(0, 1) == 1);
  CHECK(m.slot_of(1, 1) == 0);
  CHECK(m.slot_of(1, 0) == -1);
}

TEST_CASE("transition and reward accessors agree with the table") {
  FiniteMdp m = two_state();
  REQUIRE_NOTHROW(m.validate());
  CHECK(m.transition_prob(1, 0, 0) == 0.5);
  CHECK(m.transition_prob(1, 0, 1) == 0.5);
  CHECK(m.transition_prob(0, 0, 0) == 0.0);
  CHECK(m.reward_on(1, 0, 0).mean() == 2.0);
  CHECK(m.reward_on(1, 0, 1).mean() == -1.0);
  // Unreachable successor: zero-point placeholder.
  CHECK(m.reward_on(0, 0, 0).mean() == 0.0);
  CHECK(m.expected_reward(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.max_abs_reward() == 2.0);
}

TEST_CASE("validation names the offending state-action pair for a bad row") {
  FiniteMdp m = two_state();
  m.table[1][0] = {{0, 0.5, RewardDist::point(2.0)}, {1, 0.4, RewardDist::point(-1.0)}};
  std::string msg = validate_message(m);
  CHECK(msg.find("s1") != std::string::npos);
  CHECK(msg.find("a0") != std::string::npos);
  CHECK(msg.find("0.9") != std::string::npos);
}

TEST_CASE("validation rejects bad successor indices and probabilities") {
  FiniteMdp m = two_state();
  m.table[0][1] = {{5, 1.0, RewardDist::point(0.0)}};
  CHECK_THROWS_AS(m.validate(), validation_error);

  m = two_state();
  m.table[0][1] = {{0, -1.0, RewardDist::point(0.0)}, {1, 2.0, RewardDist::point(0.0)}};
  CHECK_THROWS_AS(m.validate(), validation_error);
}

TEST_CASE("validation rejects unsorted or duplicated applicable actions") {
  FiniteMdp m = two_state();
  m.applicable[0] = {1, 0};
  std::swap(m.table[0][0], m.table[0][1]);
  CHECK_THROWS_AS(m.validate(), validation_error);

  m = two_state();
  m.applicable[0] = {0, 0};
  CHECK_THROWS_AS(m.validate(), validation_error);
}

TEST_CASE("validation rejects reward distributions that are not normalized") {
  FiniteMdp m = two_state();
  m.table[0][0] = {{1, 1.0, RewardDist({1.0, 2.0}, {0.3, 0.3})}};
  std::string msg = validate_message(m);
  CHECK(msg.find("reward") != std::string::npos);
}

TEST_CASE("validation rejects a bad initial distribution") {
  FiniteMdp m = two_state();
  m.initial_dist = {0.5, 0.4};
  CHECK_THROWS_AS(m.validate(), validation_error);
  m.initial_dist = {1.5, -0.5};
  CHECK_THROWS_AS(m.validate(), validation_error);
}

TEST_CASE("validation rejects out-of-range discounts") {
  FiniteMdp m = two_state();
  m.discount = 1.0;
  CHECK_THROWS_AS(m.validate(), validation_error);
  m.discount = -0.1;
  CHECK_THROWS_AS(m.validate(), validation_error);
}

TEST_CASE("deterministic stationary policies evaluate and validate") {
  FiniteMdp m = two_state();
  StationaryPolicy pi = StationaryPolicy::deterministic(m, {1, 0});
  CHECK(pi.is_deterministic());
  CHECK(pi.action_at(m, 0) == 1);
  CHECK(pi.action_at(m, 1) == 0);
  CHECK(pi.slot_probs[0][1] == 1.0);
  CHECK_NOTHROW(pi.validate(m));
}

TEST_CASE("deterministic policy construction rejects inapplicable actions") {
  FiniteMdp m = two_state();
  m.applicable[1] = {1};
  m.table[1] = {{{1, 1.0, RewardDist::point(0.5)}}};
  CHECK_THROWS_AS(StationaryPolicy::deterministic(m, {0, 0}), argument_error);
}

TEST_CASE("policy validation catches rows that are not distributions") {
  FiniteMdp m = two_state();
  StationaryPolicy pi = StationaryPolicy::deterministic(m, {1, 0});
  pi.slot_probs[0] = {0.5, 0.4};
  CHECK_THROWS_AS(pi.validate(m), validation_error);
  pi.slot_probs[0] = {1.0};
  CHECK_THROWS_AS(pi.validate(m), validation_error);
}

TEST_CASE("action_at refuses stochastic rows") {
  FiniteMdp m = two_state();
  StationaryPolicy pi = StationaryPolicy::deterministic(m, {1, 0});
  pi.slot_probs[0] = {0.5, 0.5};
  CHECK_THROWS_AS(pi.action_at(m, 0), argument_error);
}

TEST_CASE("the caterpillar candidates pass validation with exact tables") {
  PriorMixture prior = make_benchmark("caterpillar").prior;
  REQUIRE(prior.candidates.size() == 2);
  for (const auto& cand : prior.candidates) REQUIRE_NOTHROW(cand.validate());

  const FiniteMdp& m1 = prior.candidates[0];  // full bush
  const FiniteMdp& m2 = prior.candidates[1];  // empty bush
  // Shared dynamics, divergent bush rewards.
  CHECK(m1.transition_prob(0, 1, 1) == 1.0);
  CHECK(m2.transition_prob(0, 1, 1) == 1.0);
  CHECK(m1.reward_on(1, 0, 1).mean() == 150.0);
  CHECK(m2.reward_on(1, 0, 1).mean() == 0.0);
  CHECK(m1.reward_on(0, 0, 0).mean() == 21.0);
  CHECK(m2.reward_on(0, 0, 0).mean() == 21.0);
  CHECK(m1.expected_reward(0, 1) == -5.0);
  CHECK(m1.discount == 0.95);
  CHECK(prior.weights[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(prior.weights[1] == doctest::Approx(0.9).epsilon(1e-15));
}
