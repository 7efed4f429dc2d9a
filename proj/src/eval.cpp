#include "bampf/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>
#include <unordered_map>

namespace bampf {

namespace {

constexpr double kZ99 = 2.5758293035489004;  // 99% two-sided normal quantile

double rng_unit(std::mt19937_64& eng) { return (eng() >> 11) * 0x1.0p-53; }

int sample_index(std::mt19937_64& eng, const std::vector<double>& probs) {
  double u = rng_unit(eng);
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  for (size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return static_cast<int>(i);
  throw argument_error("cannot sample from an all-zero distribution");
}

StatValue initial_stat(const PriorMixture& prior, const PseudoReward* pr, StateId s) {
  return pr == nullptr ? StatValue{} : pr->statistic.initial(prior, s);
}

double action_value_of(const PlanResult& plan, ActionId a) {
  for (const auto& [act, q] : plan.action_values)
    if (act == a) return q;
  throw argument_error("action missing from plan result");
}

std::vector<std::int64_t> quantize(const Belief& b) {
  std::vector<std::int64_t> q(b.w.size());
  for (size_t i = 0; i < b.w.size(); ++i) q[i] = std::llround(b.w[i] * 1e12);
  return q;
}

struct NodeKey {
  StateId s = 0;
  int depth = 0;
  std::vector<std::int64_t> belief_q;
  StatValue stats_agent;
  StatValue stats_shaping;
  bool operator==(const NodeKey&) const = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    auto mix = [](std::size_t& h, std::size_t v) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    std::size_t h = hash_stat(k.stats_agent);
    mix(h, hash_stat(k.stats_shaping));
    mix(h, std::hash<int>{}(k.s));
    mix(h, std::hash<int>{}(k.depth));
    for (std::int64_t q : k.belief_q) mix(h, std::hash<std::int64_t>{}(q));
    return h;
  }
};

// Exact probability-weighted (extrinsic, shaped) returns of a deterministic
// agent over the finite-horizon outcome tree.
class ExactReturn {
 public:
  ExactReturn(const PriorMixture& prior, const Agent& agent, const PseudoReward* shaping,
              int horizon, std::int64_t node_limit)
      : prior_(prior), agent_(agent), shaping_(shaping), horizon_(horizon),
        node_limit_(node_limit), gamma_(prior.discount()) {}

  std::pair<double, double> run() {
    double g = 0.0, gs = 0.0;
    const auto& init = prior_.initial_dist();
    Belief b0 = Belief::from_prior(prior_);
    for (size_t s0 = 0; s0 < init.size(); ++s0) {
      if (init[s0] <= 0.0) continue;
      auto [cg, cgs] = value(static_cast<StateId>(s0), b0,
                             initial_stat(prior_, agent_.objective.get(), s0),
                             initial_stat(prior_, shaping_, s0), 0);
      g += init[s0] * cg;
      gs += init[s0] * cgs;
    }
    return {g, gs};
  }

  std::int64_t nodes() const { return nodes_; }

 private:
  std::pair<double, double> value(StateId s, const Belief& b, StatValue sa, StatValue sf,
                                  int depth) {
    if (depth == horizon_) return {0.0, 0.0};
    NodeKey key{s, depth, quantize(b), sa, sf};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    if (++nodes_ > node_limit_)
      throw capacity_error("exact return enumeration exceeded " + std::to_string(node_limit_) +
                           " nodes");

    AugmentedState aug{s, b, sa, depth};
    ActionId a = agent_.act(prior_, aug, nullptr);
    double g = 0.0, gs = 0.0;
    for (const Successor& sc : successor_distribution(prior_, aug, a, agent_.objective.get())) {
      double f = 0.0;
      StatValue sf_next = sf;
      if (shaping_ != nullptr) {
        StepContext ctx{&prior_, &b, s, a, sc.reward, sc.aug.s, &sc.aug.belief, false};
        sf_next = shaping_->statistic.update(sf, ctx);
        f = shaping_->f(sf, ctx, sf_next);
      }
      auto [cg, cgs] = value(sc.aug.s, sc.aug.belief, sc.aug.stats, std::move(sf_next), depth + 1);
      g += sc.prob * (sc.reward + gamma_ * cg);
      gs += sc.prob * (sc.reward + f + gamma_ * cgs);
    }
    auto out = std::make_pair(g, gs);
    memo_.emplace(std::move(key), out);
    return out;
  }

  const PriorMixture& prior_;
  const Agent& agent_;
  const PseudoReward* shaping_;
  int horizon_;
  std::int64_t node_limit_;
  double gamma_;
  std::int64_t nodes_ = 0;
  std::unordered_map<NodeKey, std::pair<double, double>, NodeKeyHash> memo_;
};

// Plans at (state, belief) are agent-independent; cache them across a walk.
class PlanCache {
 public:
  PlanCache(const PriorMixture& prior, const PlannerConfig& cfg) : prior_(prior), cfg_(cfg) {}

  const PlanResult& at(StateId s, const Belief& b) {
    auto key = std::make_pair(s, quantize(b));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    AugmentedState aug{s, b, StatValue{}, 0};
    PlanResult plan = plan_bayes_optimal(prior_, aug, nullptr, cfg_);
    max_error_ = std::max(max_error_, plan.error_bound);
    return cache_.emplace(std::move(key), std::move(plan)).first->second;
  }

  double max_error() const { return max_error_; }

 private:
  const PriorMixture& prior_;
  PlannerConfig cfg_;
  std::map<std::pair<StateId, std::vector<std::int64_t>>, PlanResult> cache_;
  double max_error_ = 0.0;
};

// Discounted sum of per-step optimality shortfalls along the agent's own
// outcome tree (the performance-difference estimator).
class PdlWalk {
 public:
  PdlWalk(const PriorMixture& prior, const Agent& agent, PlanCache& plans, int horizon,
          std::int64_t node_limit)
      : prior_(prior), agent_(agent), plans_(plans), horizon_(horizon), node_limit_(node_limit),
        gamma_(prior.discount()) {}

  double run() {
    double total = 0.0;
    const auto& init = prior_.initial_dist();
    Belief b0 = Belief::from_prior(prior_);
    for (size_t s0 = 0; s0 < init.size(); ++s0) {
      if (init[s0] <= 0.0) continue;
      total += init[s0] * value(static_cast<StateId>(s0), b0,
                                initial_stat(prior_, agent_.objective.get(), s0), 0);
    }
    return total;
  }

 private:
  double value(StateId s, const Belief& b, StatValue sa, int depth) {
    if (depth == horizon_) return 0.0;
    NodeKey key{s, depth, quantize(b), sa, StatValue{}};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    if (++nodes_ > node_limit_)
      throw capacity_error("regret walk exceeded " + std::to_string(node_limit_) + " nodes");

    const PlanResult& plan = plans_.at(s, b);
    AugmentedState aug{s, b, sa, depth};
    ActionId a = agent_.act(prior_, aug, nullptr);
    double out = plan.value - action_value_of(plan, a);
    for (const Successor& sc : successor_distribution(prior_, aug, a, agent_.objective.get()))
      out += gamma_ * sc.prob * value(sc.aug.s, sc.aug.belief, sc.aug.stats, depth + 1);
    memo_.emplace(std::move(key), out);
    return out;
  }

  const PriorMixture& prior_;
  const Agent& agent_;
  PlanCache& plans_;
  int horizon_;
  std::int64_t node_limit_;
  double gamma_;
  std::int64_t nodes_ = 0;
  std::unordered_map<NodeKey, double, NodeKeyHash> memo_;
};

struct MeanVar {
  double mean = 0.0;
  double half_width = 0.0;  // 99% normal approximation
};

MeanVar summarize(const std::vector<double>& xs) {
  MeanVar mv;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) mv.mean += x;
  mv.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mv.mean) * (x - mv.mean);
    mv.half_width = kZ99 * std::sqrt(ss / (n - 1.0) / n);
  }
  return mv;
}

double initial_expectation(const PriorMixture& prior,
                           const std::function<double(StateId)>& value_at) {
  double total = 0.0;
  const auto& init = prior.initial_dist();
  for (size_t s = 0; s < init.size(); ++s)
    if (init[s] > 0.0) total += init[s] * value_at(static_cast<StateId>(s));
  return total;
}

}  // namespace

Trace rollout_one(const PriorMixture& prior, const Agent& agent, const PseudoReward* shaping,
                  int horizon, std::uint64_t seed) {
  if (horizon < 1) throw argument_error("rollout horizon must be at least 1");
  std::mt19937_64 env_rng(seed);
  std::mt19937_64 agent_rng(seed ^ 0x6a09e667f3bcc909ull);

  Trace tr;
  tr.seed = seed;
  tr.model_index = sample_index(env_rng, prior.weights);
  const FiniteMdp& model = prior.candidates[tr.model_index];

  StateId s = sample_index(env_rng, prior.initial_dist());
  Belief b = Belief::from_prior(prior);
  StatValue stats_agent = initial_stat(prior, agent.objective.get(), s);
  StatValue stats_shape = initial_stat(prior, shaping, s);
  tr.beliefs.push_back(b);

  const double gamma = prior.discount();
  double disc = 1.0;
  for (int t = 0; t < horizon; ++t) {
    AugmentedState aug{s, b, stats_agent, t};
    ActionId a = agent.act(prior, aug, &agent_rng);

    const auto& outs = model.outcomes(s, a);
    std::vector<double> probs(outs.size());
    for (size_t k = 0; k < outs.size(); ++k) probs[k] = outs[k].prob;
    const FiniteMdp::Outcome& o = outs[sample_index(env_rng, probs)];
    double r = o.reward.values[sample_index(env_rng, o.reward.probs)];

    Belief b_next = posterior_update(prior, b, s, a, r, o.next);
    StepContext ctx{&prior, &b, s, a, r, o.next, &b_next, false};
    double f = 0.0;
    if (shaping != nullptr) {
      StatValue after = shaping->statistic.update(stats_shape, ctx);
      f = shaping->f(stats_shape, ctx, after);
      stats_shape = std::move(after);
    }
    if (agent.objective != nullptr)
      stats_agent = agent.objective->statistic.update(stats_agent, ctx);

    tr.steps.push_back({s, a, r, f, o.next});
    tr.beliefs.push_back(b_next);
    tr.g += disc * r;
    tr.g_shaped += disc * (r + f);
    disc *= gamma;
    s = o.next;
    b = std::move(b_next);
  }
  tr.tail_bound = disc * prior.max_abs_reward() / (1.0 - gamma);
  return tr;
}

std::vector<Trace> rollout(const PriorMixture& prior, const Agent& agent,
                           const PseudoReward* shaping, int horizon,
                           const std::vector<std::uint64_t>& seeds, int jobs) {
  std::vector<Trace> traces(seeds.size());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
  if (jobs == 1) {
    for (size_t i = 0; i < seeds.size(); ++i)
      traces[i] = rollout_one(prior, agent, shaping, horizon, seeds[i]);
    return traces;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1))
        traces[i] = rollout_one(prior, agent, shaping, horizon, seeds[i]);
    });
  for (auto& th : pool) th.join();
  return traces;
}

ReturnEstimate expected_return_exact(const PriorMixture& prior, const Agent& agent,
                                     const PseudoReward* shaping, int horizon,
                                     std::int64_t node_limit) {
  if (!agent.deterministic)
    throw argument_error("exact return enumeration needs a deterministic agent");
  if (horizon < 0) throw argument_error("horizon must be nonnegative");
  ExactReturn walker(prior, agent, shaping, horizon, node_limit);
  auto [g, gs] = walker.run();

  const double gamma = prior.discount();
  const double tail = std::pow(gamma, horizon) / (1.0 - gamma);
  ReturnEstimate est;
  est.g = g;
  est.g_shaped = gs;
  est.tail_bound = tail * prior.max_abs_reward();
  est.tail_bound_shaped =
      tail * (prior.max_abs_reward() + (shaping == nullptr ? 0.0 : shaping->f_max));
  est.exact = true;
  est.samples = walker.nodes();
  return est;
}

ReturnEstimate expected_return_mc(const PriorMixture& prior, const Agent& agent,
                                  const PseudoReward* shaping, int horizon, int samples,
                                  std::uint64_t seed_base, int jobs) {
  if (samples < 1) throw argument_error("monte-carlo mode needs at least one sample");
  std::vector<std::uint64_t> seeds(samples);
  for (int i = 0; i < samples; ++i) seeds[i] = seed_base + static_cast<std::uint64_t>(i);
  std::vector<Trace> traces = rollout(prior, agent, shaping, horizon, seeds, jobs);

  std::vector<double> gs(traces.size()), gss(traces.size());
  for (size_t i = 0; i < traces.size(); ++i) {
    gs[i] = traces[i].g;
    gss[i] = traces[i].g_shaped;
  }
  MeanVar mg = summarize(gs), mgs = summarize(gss);

  const double gamma = prior.discount();
  const double tail = std::pow(gamma, horizon) / (1.0 - gamma);
  ReturnEstimate est;
  est.g = mg.mean;
  est.g_shaped = mgs.mean;
  est.half_width = mg.half_width;
  est.half_width_shaped = mgs.half_width;
  est.tail_bound = tail * prior.max_abs_reward();
  est.tail_bound_shaped =
      tail * (prior.max_abs_reward() + (shaping == nullptr ? 0.0 : shaping->f_max));
  est.samples = samples;
  return est;
}

RegretReport bayesian_regret(const PriorMixture& prior, const Agent& agent, int horizon,
                             const PlannerConfig& cfg, RegretMethod method, int samples,
                             std::uint64_t seed_base, std::int64_t node_limit) {
  const double gamma = prior.discount();
  const double r_max = prior.max_abs_reward();
  PlanCache plans(prior, cfg);

  RegretReport rep;
  rep.horizon = horizon;
  rep.samples = samples;

  double opt_bound = 0.0;
  rep.optimal_value = initial_expectation(prior, [&](StateId s) {
    const PlanResult& plan = plans.at(s, Belief::from_prior(prior));
    opt_bound += plan.error_bound;
    return plan.value;
  });

  const double tail = std::pow(gamma, horizon) * r_max / (1.0 - gamma);

  if (method != RegretMethod::pdl) {
    if (samples == 0) {
      ReturnEstimate est = expected_return_exact(prior, agent, nullptr, horizon, node_limit);
      rep.agent_value = est.g;
      rep.direct_bound = opt_bound + est.tail_bound;
    } else {
      ReturnEstimate est =
          expected_return_mc(prior, agent, nullptr, horizon, samples, seed_base, 1);
      rep.agent_value = est.g;
      rep.direct_bound = opt_bound + est.tail_bound;
      rep.half_width = est.half_width;
    }
    rep.direct = rep.optimal_value - rep.agent_value;
  }

  if (method != RegretMethod::direct) {
    if (samples == 0) {
      PdlWalk walk(prior, agent, plans, horizon, node_limit);
      rep.pdl = walk.run();
    } else {
      std::vector<std::uint64_t> seeds(samples);
      for (int i = 0; i < samples; ++i) seeds[i] = seed_base + static_cast<std::uint64_t>(i);
      std::vector<Trace> traces = rollout(prior, agent, nullptr, horizon, seeds, 1);
      std::vector<double> vals(traces.size());
      for (size_t i = 0; i < traces.size(); ++i) {
        double disc = 1.0, acc = 0.0;
        for (size_t t = 0; t < traces[i].steps.size(); ++t) {
          const TraceStep& st = traces[i].steps[t];
          const PlanResult& plan = plans.at(st.s, traces[i].beliefs[t]);
          acc += disc * (plan.value - action_value_of(plan, st.a));
          disc *= gamma;
        }
        vals[i] = acc;
      }
      MeanVar mv = summarize(vals);
      rep.pdl = mv.mean;
      rep.half_width = std::max(rep.half_width, mv.half_width);
    }
    // Every visited state contributes at most twice the worst planner error
    // to its shortfall term, plus the truncated tail of nonnegative gaps.
    rep.pdl_bound = 2.0 * plans.max_error() * (1.0 - std::pow(gamma, horizon)) / (1.0 - gamma) +
                    2.0 * tail;
    rep.per_step = (1.0 - gamma) * rep.pdl;
  } else {
    rep.per_step = (1.0 - gamma) * rep.direct;
  }
  return rep;
}

Theorem1Report verify_theorem1(const PriorMixture& prior, const Potential& potential,
                               const PlannerConfig& cfg, int depth) {
  PseudoReward bampf = make_bampf(potential, prior.discount());
  PlannerConfig cfg_shaped = cfg;
  cfg_shaped.phi_max = potential.phi_max;

  std::map<std::tuple<StateId, std::vector<std::int64_t>, std::size_t>, AugmentedState> seen;
  std::vector<AugmentedState> frontier;

  auto try_add = [&](const AugmentedState& aug) {
    auto key = std::make_tuple(aug.s, quantize(aug.belief), hash_stat(aug.stats));
    if (seen.emplace(std::move(key), aug).second) frontier.push_back(aug);
  };

  const auto& init = prior.initial_dist();
  for (size_t s0 = 0; s0 < init.size(); ++s0)
    if (init[s0] > 0.0)
      try_add(initial_augmented_state(prior, static_cast<StateId>(s0), &bampf));

  for (size_t i = 0; i < frontier.size(); ++i) {
    AugmentedState aug = frontier[i];  // copy: frontier may reallocate
    if (aug.depth >= depth) continue;
    for (ActionId a : prior.applicable(aug.s))
      for (const Successor& sc : successor_distribution(prior, aug, a, &bampf)) try_add(sc.aug);
  }

  Theorem1Report rep;
  std::map<std::pair<StateId, std::vector<std::int64_t>>, PlanResult> unshaped_cache;
  for (const auto& [key, aug] : seen) {
    auto ukey = std::make_pair(aug.s, quantize(aug.belief));
    auto it = unshaped_cache.find(ukey);
    if (it == unshaped_cache.end()) {
      AugmentedState plain{aug.s, aug.belief, StatValue{}, 0};
      it = unshaped_cache.emplace(ukey, plan_bayes_optimal(prior, plain, nullptr, cfg)).first;
    }
    const PlanResult& pu = it->second;
    AugmentedState shaped_root{aug.s, aug.belief, aug.stats, 0};
    PlanResult ps = plan_bayes_optimal(prior, shaped_root, &bampf, cfg_shaped);
    const double err = pu.error_bound + ps.error_bound;
    ++rep.states_checked;

    // (i) Optimal action sets coincide, with disagreements only where the
    // action is within tie_tol + error bounds of optimal in the plan that
    // excluded it (borderline ties the truncation may break either way).
    if (pu.optimal_action_set != ps.optimal_action_set) {
      auto excess_in = [&](const PlanResult& plan, ActionId a) {
        return (plan.value - action_value_of(plan, a)) - (cfg.tie_tol + err);
      };
      for (ActionId a : pu.optimal_action_set)
        if (std::find(ps.optimal_action_set.begin(), ps.optimal_action_set.end(), a) ==
            ps.optimal_action_set.end())
          rep.max_action_violation = std::max(rep.max_action_violation, excess_in(ps, a));
      for (ActionId a : ps.optimal_action_set)
        if (std::find(pu.optimal_action_set.begin(), pu.optimal_action_set.end(), a) ==
            pu.optimal_action_set.end())
          rep.max_action_violation = std::max(rep.max_action_violation, excess_in(pu, a));
      if (rep.max_action_violation > 0.0) rep.action_sets_match = false;
    }

    // (ii) Shaped value sits exactly phi below the unshaped value.
    const double phi_here = potential.at(prior, aug.stats, aug.belief, aug.s);
    const double shift_err = std::abs(ps.value + phi_here - pu.value);
    const double shift_tol = err + 1e-9;
    rep.max_shift_error = std::max(rep.max_shift_error, shift_err);
    rep.shift_tolerance = std::max(rep.shift_tolerance, shift_tol);
    if (shift_err > shift_tol) rep.value_shift_matches = false;
  }
  return rep;
}

BoundReport verify_bound_cor2(const PriorMixture& prior, const Potential& potential,
                              const Agent& agent, int horizon, const PlannerConfig& cfg) {
  PseudoReward bampf = make_bampf(potential, prior.discount());
  PlannerConfig cfg_shaped = cfg;
  cfg_shaped.phi_max = potential.phi_max;
  const double gamma = prior.discount();

  double err_unshaped = 0.0, err_shaped = 0.0;
  Belief b0 = Belief::from_prior(prior);
  double opt_unshaped = initial_expectation(prior, [&](StateId s) {
    AugmentedState aug{s, b0, StatValue{}, 0};
    PlanResult plan = plan_bayes_optimal(prior, aug, nullptr, cfg);
    err_unshaped += plan.error_bound;
    return plan.value;
  });
  double opt_shaped = initial_expectation(prior, [&](StateId s) {
    PlanResult plan =
        plan_bayes_optimal(prior, initial_augmented_state(prior, s, &bampf), &bampf, cfg_shaped);
    err_shaped += plan.error_bound;
    return plan.value;
  });

  ReturnEstimate est = expected_return_exact(prior, agent, &bampf, horizon);
  const double regret_unshaped = opt_unshaped - est.g;
  const double regret_shaped = opt_shaped - est.g_shaped;

  BoundReport rep;
  rep.name = "cor2";
  rep.instance = prior.name + " / " + agent.name;
  rep.measured = std::abs(regret_shaped - regret_unshaped);
  rep.phi_max = potential.phi_max;
  rep.r_max = prior.max_abs_reward();
  rep.discount = gamma;
  rep.bound = err_unshaped + err_shaped + est.tail_bound + est.tail_bound_shaped +
              2.0 * std::pow(gamma, horizon) * potential.phi_max;
  rep.slack = 1e-9;
  rep.satisfied = rep.measured <= rep.bound + rep.slack;
  return rep;
}

BoundReport verify_bound_cor3(const PriorMixture& prior, const Potential& potential, int k,
                              int horizon, const PlannerConfig& cfg) {
  PseudoReward bampf = make_bampf(potential, prior.discount());
  Agent agent = make_kstep_agent(k, &bampf, cfg.tie_tol);
  RegretReport rr = bayesian_regret(prior, agent, horizon, cfg, RegretMethod::direct);

  const double gamma = prior.discount();
  BoundReport rep;
  rep.name = "cor3";
  rep.instance = prior.name;
  rep.k = k;
  rep.phi_max = potential.phi_max;
  rep.r_max = prior.max_abs_reward();
  rep.discount = gamma;
  rep.measured = rr.direct;
  rep.bound =
      2.0 * std::pow(gamma, k) * (potential.phi_max + rep.r_max * gamma / (1.0 - gamma));
  rep.slack = rr.direct_bound + 1e-9;
  rep.satisfied = rep.measured <= rep.bound + rep.slack;
  return rep;
}

BoundReport verify_bound_kstep(const PriorMixture& prior, const Potential& potential, int k,
                               const PlannerConfig& cfg) {
  PseudoReward bampf = make_bampf(potential, prior.discount());
  Agent agent = make_kstep_agent(k, &bampf, cfg.tie_tol);

  Belief b0 = Belief::from_prior(prior);
  double opt_k = initial_expectation(prior, [&](StateId s) {
    AugmentedState aug{s, b0, StatValue{}, 0};
    return plan_finite_horizon(prior, aug, nullptr, k, cfg.tie_tol).value;
  });
  double agent_k = k == 0 ? 0.0 : expected_return_exact(prior, agent, nullptr, k).g;

  BoundReport rep;
  rep.name = "kstep_lemma";
  rep.instance = prior.name;
  rep.k = k;
  rep.phi_max = potential.phi_max;
  rep.r_max = prior.max_abs_reward();
  rep.discount = prior.discount();
  rep.measured = opt_k - agent_k;
  rep.bound = 2.0 * std::pow(prior.discount(), k) * potential.phi_max;
  rep.slack = 1e-9;
  rep.satisfied = rep.measured <= rep.bound + rep.slack;
  return rep;
}

BoundReport verify_d_horizon(double phi_max, double d, double discount) {
  if (!(phi_max >= 0.0) || !(d > 0.0) || !(discount > 0.0 && discount < 1.0))
    throw argument_error("d-horizon needs phi_max >= 0, d > 0 and discount in (0,1)");
  int k = 0;
  while (2.0 * std::pow(discount, k) * phi_max >= d) {
    if (++k > 10'000'000) throw capacity_error("d-horizon search exceeded 10^7 steps");
  }
  BoundReport rep;
  rep.name = "d_horizon";
  rep.instance = "closed-form";
  rep.k = k;
  rep.phi_max = phi_max;
  rep.discount = discount;
  rep.measured = static_cast<double>(k);
  rep.bound = d;
  rep.satisfied = 2.0 * std::pow(discount, k) * phi_max < d &&
                  (k == 0 || 2.0 * std::pow(discount, k - 1) * phi_max >= d);
  return rep;
}

}  // namespace bampf
