#include "doctest.h"

#include <cmath>
#include <string>

#include "bampf/certify.hpp"
#include "bampf/envs.hpp"
#include "bampf/errors.hpp"

using namespace bampf;

TEST_CASE("potential-backed builtins certify as bona fide pseudo-rewards") {
  PriorMixture prior = make_benchmark("caterpillar").prior;
  BuiltinParams params;
  params.phi_table = {2.0, -2.0};
  params.subgoals = {1};
  for (const char* name : {"state_potential_pbsf", "unique_state_count", "information_gain",
                           "entropy_bonus", "subgoal_count", "negative_surprise"}) {
    CAPTURE(name);
    PseudoReward f = make_builtin(name, prior, params);
    BampfCertificate cert = check_bampf(f, prior, 3);
    CHECK(cert.verdict == BampfCertificate::Verdict::certified_bampf);
    CHECK_FALSE(cert.witness.has_value());
    CHECK(cert.max_residual <= 1e-9);
    CHECK(cert.transitions_checked > 0);
    CHECK(cert.depth == 3);
  }
}

TEST_CASE("a hand-built potential wrapper certifies on a stochastic domain") {
  PriorMixture prior = make_benchmark("noisy_coin").prior;
  PseudoReward f = make_builtin("information_gain", prior, {});
  BampfCertificate cert = check_bampf(f, prior, 4);
  CHECK(cert.verdict == BampfCertificate::Verdict::certified_bampf);
}

TEST_CASE("prediction error on the coin is caught with the textbook residual") {
  PriorMixture prior = make_benchmark("noisy_coin").prior;
  PseudoReward f = make_builtin("prediction_error", prior, {});
  BampfCertificate cert = check_bampf(f, prior, 3);

  REQUIRE(cert.verdict == BampfCertificate::Verdict::witness_found);
  REQUIRE(cert.witness.has_value());
  const Witness& w = *cert.witness;

  // Any witness must be sound against the truncation accounting.
  CHECK(std::fabs(w.delta) > 2.0 * w.truncation_bound + 1e-9);
  CHECK(cert.max_residual >= std::fabs(w.delta) - 1e-12);

  // The coin's asymmetry pins the achievable residual at ln 2: surprisal of
  // the same flip differs by log(0.8/0.2)... folded through the absorbing
  // reconstruction the disagreement lands on exactly ln 2.
  CHECK(std::fabs(w.delta) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("a truncated clean scan is inconclusive, never certified") {
  PriorMixture prior = make_benchmark("noisy_coin").prior;
  PseudoReward f = make_builtin("information_gain", prior, {});
  BampfCertificate cert = check_bampf(f, prior, 3, 1e-9, 1);
  CHECK(cert.verdict == BampfCertificate::Verdict::inconclusive);
  CHECK_FALSE(cert.witness.has_value());
  CHECK(cert.transitions_checked == 1);

  // A witness beats the budget: finding one early is conclusive.
  PseudoReward bad = make_builtin("prediction_error", prior, {});
  BampfCertificate found = check_bampf(bad, prior, 3, 1e-9, 4);
  CHECK(found.verdict == BampfCertificate::Verdict::witness_found);
}

TEST_CASE("deeper scans keep certifying potentials and keep the witness") {
  PriorMixture prior = make_benchmark("noisy_coin").prior;
  PseudoReward good = make_builtin("information_gain", prior, {});
  PseudoReward bad = make_builtin("prediction_error", prior, {});
  for (int depth : {1, 2, 4}) {
    CAPTURE(depth);
    CHECK(check_bampf(good, prior, depth).verdict == BampfCertificate::Verdict::certified_bampf);
    CHECK(check_bampf(bad, prior, depth).verdict == BampfCertificate::Verdict::witness_found);
  }
}

TEST_CASE("the necessity instance realizes the witnessed disagreement") {
  PriorMixture prior = make_benchmark("noisy_coin").prior;
  PseudoReward f = make_builtin("prediction_error", prior, {});
  BampfCertificate cert = check_bampf(f, prior, 3);
  REQUIRE(cert.witness.has_value());

  Counterexample cex = build_necessity_counterexample(*cert.witness, prior.discount());
  REQUIRE_NOTHROW(cex.instance.validate());
  CHECK(cex.delta == doctest::Approx(std::fabs(cert.witness->delta)).epsilon(1e-12));

  // Geometry: from s1, action a reaches the absorbing state with an extra
  // delta/2; action a' detours through s2 for the same base reward.
  const FiniteMdp& m = cex.instance.candidates[0];
  REQUIRE(m.n_states == 3);
  CHECK(m.expected_reward(0, cex.action_a) - cex.r_prime == doctest::Approx(cex.delta / 2));

  // Unshaped, the detour through s2 loses the delta/2 bonus; the planner must
  // prefer `a`. Shaped with the rebased witness pseudo-reward the preference
  // flips. Both plans must be singleton decisions, not ties.
  PlannerConfig cfg = PlannerConfig::for_prior(cex.instance);
  AugmentedState root = initial_augmented_state(cex.instance, 0);
  PlanResult unshaped = plan_bayes_optimal(cex.instance, root, nullptr, cfg);
  REQUIRE(unshaped.optimal_action_set.size() == 1);
  CHECK(unshaped.optimal_action_set[0] == cex.predicted_unshaped);
  CHECK(cex.predicted_unshaped == cex.action_a);

  AugmentedState shaped_root = initial_augmented_state(cex.instance, 0, &cex.shaping);
  PlanResult shaped = plan_bayes_optimal(cex.instance, shaped_root, &cex.shaping, cfg);
  REQUIRE(shaped.optimal_action_set.size() == 1);
  CHECK(shaped.optimal_action_set[0] == cex.predicted_shaped);
  CHECK(cex.predicted_shaped == cex.action_a_prime);

  // The unshaped advantage of `a` is exactly delta/2 (the detour path repays
  // the same r' stream one step later at zero reward, by construction).
  double gap = 0.0;
  for (auto [a, q] : unshaped.action_values)
    if (a == cex.action_a) gap += q;
  for (auto [a, q] : unshaped.action_values)
    if (a == cex.action_a_prime) gap -= q;
  CHECK(std::fabs(gap - cex.delta / 2.0) <= 2.0 * unshaped.error_bound + 1e-9);
}

TEST_CASE("unsound witnesses are refused by the counterexample builder") {
  PriorMixture prior = make_benchmark("noisy_coin").prior;
  PseudoReward f = make_builtin("prediction_error", prior, {});
  BampfCertificate cert = check_bampf(f, prior, 3);
  REQUIRE(cert.witness.has_value());

  Witness w = *cert.witness;
  w.truncation_bound = std::fabs(w.delta);  // now 2*bound + tol > |delta|
  CHECK_THROWS_AS(build_necessity_counterexample(w, prior.discount()), argument_error);

  Witness z = *cert.witness;
  z.delta = 0.0;
  CHECK_THROWS_AS(build_necessity_counterexample(z, prior.discount()), argument_error);
}

TEST_CASE("certifier argument validation") {
  PriorMixture prior = make_benchmark("noisy_coin").prior;
  PseudoReward f = make_builtin("information_gain", prior, {});
  CHECK_THROWS_AS(check_bampf(f, prior, -1), argument_error);
  CHECK_THROWS_AS(check_bampf(f, prior, 3, -1.0), argument_error);
}
