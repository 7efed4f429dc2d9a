#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "bampf/envs.hpp"
#include "bampf/errors.hpp"
#include "bampf/eval.hpp"

using namespace bampf;

namespace {

bool same_trace(const Trace& a, const Trace& b) {
  if (a.model_index != b.model_index || a.steps.size() != b.steps.size()) return false;
  for (size_t t = 0; t < a.steps.size(); ++t) {
    const TraceStep &x = a.steps[t], &y = b.steps[t];
    if (x.s != y.s || x.a != y.a || x.r != y.r || x.f != y.f || x.next != y.next) return false;
  }
  return a.g == b.g && a.g_shaped == b.g_shaped;
}

}  // namespace

TEST_CASE("trace returns are recomputable from the step records") {
  PriorMixture prior = make_benchmark("caterpillar").prior;
  PseudoReward ig = make_builtin("information_gain", prior, {});
  Agent agent = make_kstep_agent(8);

  Trace tr = rollout_one(prior, agent, &ig, 40, 123);
  REQUIRE(tr.steps.size() == 40);
  CHECK(tr.beliefs.size() == 41);

  double g = 0.0, gf = 0.0, disc = 1.0;
  for (const TraceStep& st : tr.steps) {
    g += disc * st.r;
    gf += disc * st.f;
    disc *= prior.discount();
  }
  CHECK(tr.g == doctest::Approx(g).epsilon(1e-12));
  CHECK(tr.g_shaped == doctest::Approx(g + gf).epsilon(1e-12));
  CHECK(tr.tail_bound ==
        doctest::Approx(std::pow(prior.discount(), 40) * 150.0 / (1.0 - prior.discount())));
  CHECK((tr.model_index == 0 || tr.model_index == 1));
}

TEST_CASE("rollouts are deterministic in the seed and ordered across threads") {
  PriorMixture prior = make_benchmark("caterpillar").prior;
  Agent agent = make_epsilon_greedy_agent(make_ce_agent(InterpMode::exact_posterior), 0.4);

  Trace a = rollout_one(prior, agent, nullptr, 30, 77);
  Trace b = rollout_one(prior, agent, nullptr, 30, 77);
  CHECK(same_trace(a, b));
  CHECK(a.seed == 77);

  std::vector<std::uint64_t> seeds = {5, 6, 7, 8, 9, 10};
  std::vector<Trace> seq = rollout(prior, agent, nullptr, 30, seeds, 1);
  std::vector<Trace> par = rollout(prior, agent, nullptr, 30, seeds, 3);
  REQUIRE(seq.size() == seeds.size());
  REQUIRE(par.size() == seeds.size());
  for (size_t i = 0; i < seeds.size(); ++i) {
    CHECK(seq[i].seed == seeds[i]);
    CHECK(same_trace(seq[i], par[i]));
  }
}

TEST_CASE("exact expected returns reproduce the worked caterpillar values") {
  PriorMixture prior = make_benchmark("caterpillar").prior;
  PlannerConfig cfg = PlannerConfig::for_prior(prior);

  ReturnEstimate bayes = expected_return_exact(prior, make_bayes_optimal_agent(cfg), nullptr, 240);
  CHECK(bayes.exact);
  CHECK(bayes.half_width == 0.0);
  CHECK(bayes.samples > 0);
  CHECK(std::fabs(bayes.g - 600.0265) <= bayes.tail_bound + 0.001);
  CHECK(bayes.tail_bound == doctest::Approx(std::pow(0.95, 240) * 3000.0).epsilon(1e-9));

  // Without shaping the two returns coincide.
  CHECK(bayes.g_shaped == doctest::Approx(bayes.g).epsilon(1e-12));
}

TEST_CASE("Monte-Carlo and exact return estimates agree within their accounting") {
  PriorMixture prior = make_benchmark("caterpillar").prior;
  Agent ce = make_ce_agent(InterpMode::exact_posterior);

  ReturnEstimate ex = expected_return_exact(prior, ce, nullptr, 240);
  CHECK(ex.exact);
  CHECK(std::fabs(ex.g - 420.0) <= ex.tail_bound + 1e-9);

  ReturnEstimate mc = expected_return_mc(prior, ce, nullptr, 240, 64, 1000, 2);
  CHECK_FALSE(mc.exact);
  CHECK(mc.samples == 64);
  // The stay-at-home return is deterministic, so the estimator is spot on.
  CHECK(mc.g == doctest::Approx(ex.g).epsilon(1e-9));
  CHECK(mc.half_width == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("exact agents refuse the enumerator when they are stochastic") {
  PriorMixture prior = make_benchmark("caterpillar").prior;
  Agent eps = make_epsilon_greedy_agent(make_ce_agent(InterpMode::exact_posterior), 0.1);
  CHECK_THROWS_AS(expected_return_exact(prior, eps, nullptr, 10), argument_error);
}

TEST_CASE("both regret estimators land on the worked caterpillar value") {
  PriorMixture prior = make_benchmark("caterpillar").prior;
  PlannerConfig cfg = PlannerConfig::for_prior(prior);
  Agent ce = make_ce_agent(InterpMode::exact_posterior);

  RegretReport rep = bayesian_regret(prior, ce, 240, cfg, RegretMethod::both);
  CHECK(rep.samples == 0);
  CHECK(rep.direct == doctest::Approx(180.0265).epsilon(5e-4));
  CHECK(rep.pdl == doctest::Approx(180.0265).epsilon(5e-4));
  CHECK(std::fabs(rep.direct - rep.pdl) <= rep.direct_bound + rep.pdl_bound + 1e-9);
  CHECK(rep.per_step == doctest::Approx((1.0 - prior.discount()) * rep.pdl).epsilon(1e-12));
  CHECK(rep.per_step == doctest::Approx(9.0013).epsilon(1e-3));
  CHECK(rep.optimal_value == doctest::Approx(600.0265).epsilon(1e-4));
  CHECK(rep.agent_value == doctest::Approx(420.0).epsilon(1e-4));
  CHECK(rep.horizon == 240);

  // The Bayes-optimal agent has (numerically) zero regret against itself.
  RegretReport self = bayesian_regret(prior, make_bayes_optimal_agent(cfg), 60, cfg);
  CHECK(std::fabs(self.direct) <= self.direct_bound + 1e-6);
  CHECK(std::fabs(self.pdl) <= self.pdl_bound + 1e-6);
}

TEST_CASE("the invariance theorem verifies on the caterpillar for builtin potentials") {
  PriorMixture prior = make_benchmark("caterpillar").prior;
  PlannerConfig cfg = PlannerConfig::for_prior(prior);

  for (const char* name : {"information_gain", "negative_surprise", "unique_state_count"}) {
    CAPTURE(name);
    PseudoReward pr = make_builtin(name, prior, {});
    REQUIRE(pr.claimed_potential.has_value());
    Theorem1Report rep = verify_theorem1(prior, *pr.claimed_potential, cfg, 2);
    CHECK(rep.pass());
    CHECK(rep.states_checked > 0);
    CHECK(rep.max_shift_error <= rep.shift_tolerance);
  }
}

TEST_CASE("shaping leaves the frozen-belief agent's regret unchanged") {
  PriorMixture prior = make_benchmark("caterpillar").prior;
  PlannerConfig cfg = PlannerConfig::for_prior(prior);
  PseudoReward ig = make_builtin("information_gain", prior, {});

  for (const Agent& agent : {make_ce_agent(InterpMode::exact_posterior), make_kstep_agent(3),
                             make_bayes_optimal_agent(cfg)}) {
    CAPTURE(agent.name);
    BoundReport rep = verify_bound_cor2(prior, *ig.claimed_potential, agent, 120, cfg);
    CHECK(rep.name == "cor2");
    CHECK(rep.satisfied);
    CHECK(rep.measured <= rep.bound + rep.slack + 1e-9);
  }
}

TEST_CASE("the k-step lookahead bounds hold with the worked constants") {
  PriorMixture prior = make_benchmark("caterpillar").prior;
  PlannerConfig cfg = PlannerConfig::for_prior(prior);
  BuiltinParams params;
  params.phi_table = {2.0, -2.0};
  PseudoReward pbsf = make_builtin("state_potential_pbsf", prior, params);
  const Potential& pot = *pbsf.claimed_potential;
  CHECK(pot.phi_max == doctest::Approx(2.0));

  BoundReport lemma = verify_bound_kstep(prior, pot, 5, cfg);
  CHECK(lemma.name == "kstep_lemma");
  CHECK(lemma.k == 5);
  CHECK(lemma.bound == doctest::Approx(2.0 * std::pow(0.95, 5) * 2.0).epsilon(1e-12));
  CHECK(lemma.satisfied);

  BoundReport cor3 = verify_bound_cor3(prior, pot, 5, 240, cfg);
  CHECK(cor3.name == "cor3");
  CHECK(cor3.bound ==
        doctest::Approx(2.0 * std::pow(0.95, 5) * (2.0 + 150.0 * 0.95 / 0.05)).epsilon(1e-9));
  CHECK(cor3.bound == doctest::Approx(4413.6465).epsilon(1e-6));
  CHECK(cor3.satisfied);
  CHECK(cor3.phi_max == doctest::Approx(2.0));
  CHECK(cor3.r_max == doctest::Approx(150.0));
}

TEST_CASE("the shaping horizon is the smallest k that beats the resolution") {
  BoundReport rep = verify_d_horizon(1.0, 0.01, 0.95);
  CHECK(rep.name == "d_horizon");
  CHECK(rep.k == 104);
  CHECK(rep.measured == 104.0);
  CHECK(rep.bound == 0.01);
  CHECK(rep.satisfied);
  CHECK(2.0 * std::pow(0.95, 104) * 1.0 < 0.01);
  CHECK(2.0 * std::pow(0.95, 103) * 1.0 >= 0.01);

  CHECK(verify_d_horizon(std::log(2.0), 0.01, 0.95).k == 97);
  CHECK_THROWS_AS(verify_d_horizon(1.0, 0.0, 0.95), argument_error);
  CHECK_THROWS_AS(verify_d_horizon(1.0, 0.01, 1.0), argument_error);
}

TEST_CASE("a strong surprisal penalty flips even the Bayes planner") {
  // Negative-scale prediction error punishes informative transitions. Shaped
  // with it, the planner prefers never to look at the bush; the same planner
  // unshaped prefers to go. Bounded potentials can never do this.
  PriorMixture prior = make_benchmark("caterpillar").prior;
  PlannerConfig cfg = PlannerConfig::for_prior(prior);

  BuiltinParams params;
  params.scale = -600.0;
  PseudoReward pe = make_builtin("prediction_error", prior, params);

  AugmentedState plain_root = initial_augmented_state(prior, 0, nullptr);
  AugmentedState shaped_root = initial_augmented_state(prior, 0, &pe);
  PlanResult plain = plan_bayes_optimal(prior, plain_root, nullptr, cfg);
  PlanResult shaped = plan_bayes_optimal(prior, shaped_root, &pe, cfg);
  CHECK(plain.optimal_action_set == std::vector<ActionId>{1});
  CHECK(shaped.optimal_action_set == std::vector<ActionId>{0});
}
