#include "bampf/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "bampf/dp.hpp"

namespace bampf {

namespace {

constexpr double kBeliefKeyScale = 1e12;

struct PlanKey {
  StateId s = 0;
  int depth = 0;
  std::vector<std::int64_t> belief_q;
  StatValue stats;

  bool operator==(const PlanKey&) const = default;
};

struct PlanKeyHash {
  std::size_t operator()(const PlanKey& k) const {
    std::size_t h = hash_stat(k.stats);
    h ^= std::hash<int>{}(k.s) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= std::hash<int>{}(k.depth) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    for (std::int64_t q : k.belief_q)
      h ^= std::hash<std::int64_t>{}(q) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
  }
};

std::vector<std::int64_t> quantize_belief(const Belief& b) {
  // Belief weights enter memo keys on a 1e-12 grid so posteriors that agree
  // up to float association (same observation multiset, different order)
  // share one entry. Values used in the arithmetic stay exact.
  std::vector<std::int64_t> q(b.w.size());
  for (size_t i = 0; i < b.w.size(); ++i) q[i] = std::llround(b.w[i] * kBeliefKeyScale);
  return q;
}

bool stats_compatible(const StatValue& have, const StatValue& want) {
  if (have.index() != want.index()) return false;
  const auto* hv = std::get_if<std::vector<std::int64_t>>(&have);
  if (hv != nullptr) {
    const auto& wv = std::get<std::vector<std::int64_t>>(want);
    return hv->size() == wv.size();
  }
  return true;
}

class Expectimax {
 public:
  Expectimax(const PriorMixture& prior, const PseudoReward* shaping, const PlannerConfig& cfg,
             bool finite_objective)
      : prior_(prior), shaping_(shaping), cfg_(cfg), finite_(finite_objective) {
    gamma_ = prior.discount();
    leaf_bound_ = 0.0;
    if (!finite_) {
      leaf_bound_ = cfg.r_max / (1.0 - gamma_);
      if (shaping_ != nullptr) {
        if (shaping_->claimed_potential.has_value()) {
          double pm = cfg.phi_max.value_or(shaping_->claimed_potential->phi_max);
          leaf_bound_ += pm;   // telescoped shaping tail of a bounded potential
        } else {
          leaf_bound_ += shaping_->f_max / (1.0 - gamma_);
        }
      }
    }
    // Once the belief is degenerate the subtree is an ordinary MDP. Unshaped,
    // its value is the realized MDP's optimum; under a claimed bounded
    // potential the shaped tail telescopes to exactly -phi(entering history),
    // regardless of how the statistic keeps evolving afterwards.
    collapse_ok_ = cfg.use_collapse_shortcut && !finite_ &&
                   (shaping_ == nullptr || shaping_->claimed_potential.has_value());
  }

  // (value, rigorous error bound) of the best behavior from aug over `depth`
  // further reward layers.
  std::pair<double, double> value(const AugmentedState& aug, int depth) {
    int which = -1;
    if (collapse_ok_ && aug.belief.degenerate(&which)) {
      double v = realized_value(which, aug.s);
      if (shaping_ != nullptr)
        v -= shaping_->claimed_potential->at(prior_, aug.stats, aug.belief, aug.s);
      return {v, cfg_.vi_tol};
    }
    if (depth == 0) return {0.0, leaf_bound_};

    PlanKey key{aug.s, depth, quantize_belief(aug.belief), aug.stats};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    if (++nodes_ > cfg_.node_limit)
      throw capacity_error("planner exceeded node limit " + std::to_string(cfg_.node_limit));

    double best = -std::numeric_limits<double>::infinity();
    double best_bound = 0.0;
    for (ActionId a : prior_.applicable(aug.s)) {
      auto [q, b] = action_value(aug, a, depth);
      if (q > best) best = q;
      best_bound = std::max(best_bound, b);
    }
    auto out = std::make_pair(best, best_bound);
    memo_.emplace(std::move(key), out);
    return out;
  }

  std::pair<double, double> action_value(const AugmentedState& aug, ActionId a, int depth) {
    double q = 0.0;
    double bound = 0.0;
    for (const Successor& sc : successor_distribution(prior_, aug, a, shaping_)) {
      auto [v, b] = value(sc.aug, depth - 1);
      q += sc.prob * (sc.reward + sc.f_value + gamma_ * v);
      bound += sc.prob * gamma_ * b;
    }
    return {q, bound};
  }

  PlanResult plan(const AugmentedState& aug) {
    PlanResult res;
    const auto& acts = prior_.applicable(aug.s);
    if (cfg_.horizon == 0) {
      res.value = 0.0;
      res.error_bound = leaf_bound_;
      for (ActionId a : acts) {
        res.action_values.emplace_back(a, 0.0);
        res.optimal_action_set.push_back(a);
      }
      return res;
    }
    double best = -std::numeric_limits<double>::infinity();
    double bound = 0.0;
    for (ActionId a : acts) {
      auto [q, b] = action_value(aug, a, cfg_.horizon);
      res.action_values.emplace_back(a, q);
      best = std::max(best, q);
      bound = std::max(bound, b);
    }
    res.value = best;
    res.error_bound = bound;
    for (const auto& [a, q] : res.action_values)
      if (q >= best - cfg_.tie_tol) res.optimal_action_set.push_back(a);
    res.nodes = nodes_;
    return res;
  }

 private:
  double realized_value(int candidate, StateId s) {
    auto it = vi_cache_.find(candidate);
    if (it == vi_cache_.end())
      it = vi_cache_.emplace(candidate, value_iteration(prior_.candidates[candidate], cfg_.vi_tol))
               .first;
    return it->second.vf.v[s];
  }

  const PriorMixture& prior_;
  const PseudoReward* shaping_;
  const PlannerConfig& cfg_;
  bool finite_;
  bool collapse_ok_ = false;
  double gamma_ = 0.0;
  double leaf_bound_ = 0.0;
  std::uint64_t nodes_ = 0;
  std::unordered_map<PlanKey, std::pair<double, double>, PlanKeyHash> memo_;
  std::unordered_map<int, ViResult> vi_cache_;
};

void check_plan_args(const PriorMixture& prior, const AugmentedState& aug,
                     const PseudoReward* shaping, const PlannerConfig& cfg) {
  if (aug.s < 0 || aug.s >= prior.n_states()) throw argument_error("augmented state out of range");
  if (aug.belief.w.size() != static_cast<size_t>(prior.n_candidates()))
    throw argument_error("belief length does not match the prior");
  if (cfg.horizon < 0) throw argument_error("horizon must be nonnegative");
  if (!(cfg.tie_tol >= 0.0)) throw argument_error("tie_tol must be nonnegative");
  double actual = prior.max_abs_reward();
  if (cfg.r_max < actual - 1e-12)
    throw argument_error("r_max " + std::to_string(cfg.r_max) +
                         " is below the prior's max |reward| " + std::to_string(actual));
  if (shaping != nullptr) {
    StatValue want = shaping->statistic.initial(prior, aug.s);
    if (!stats_compatible(aug.stats, want))
      throw argument_error("augmented state carries a statistic incompatible with the shaping");
  }
}

}  // namespace

AugmentedState initial_augmented_state(const PriorMixture& prior, StateId s,
                                       const PseudoReward* shaping) {
  AugmentedState aug;
  aug.s = s;
  aug.belief = Belief::from_prior(prior);
  aug.stats = shaping != nullptr ? shaping->statistic.initial(prior, s) : StatValue{};
  aug.depth = 0;
  return aug;
}

PlannerConfig PlannerConfig::for_prior(const PriorMixture& prior, double tail) {
  if (!(tail > 0.0)) throw argument_error("tail target must be positive");
  PlannerConfig cfg;
  cfg.r_max = prior.max_abs_reward();
  double gamma = prior.discount();
  double leaf = cfg.r_max / (1.0 - gamma);
  int h = 0;
  double factor = 1.0;
  while (factor * leaf > tail && h < 100000) {
    factor *= gamma;
    ++h;
  }
  cfg.horizon = h;
  return cfg;
}

std::vector<Successor> successor_distribution(const PriorMixture& prior,
                                              const AugmentedState& aug, ActionId a,
                                              const PseudoReward* shaping) {
  // Joint (next state, reward value) outcomes, keyed in ascending order.
  std::map<std::pair<StateId, double>, double> mass;
  for (int i = 0; i < prior.n_candidates(); ++i) {
    double w = aug.belief.w[i];
    if (w <= 0.0) continue;
    for (const auto& o : prior.candidates[i].outcomes(aug.s, a)) {
      if (o.prob <= 0.0) continue;
      for (size_t k = 0; k < o.reward.values.size(); ++k) {
        if (o.reward.probs[k] <= 0.0) continue;
        mass[{o.next, o.reward.values[k]}] += w * o.prob * o.reward.probs[k];
      }
    }
  }

  std::vector<Successor> out;
  out.reserve(mass.size());
  double total = 0.0;
  for (const auto& [key, p] : mass) {
    const auto& [s_next, r] = key;
    Successor sc;
    sc.prob = p;
    sc.reward = r;
    sc.aug.s = s_next;
    sc.aug.belief = posterior_update(prior, aug.belief, aug.s, a, r, s_next);
    sc.aug.depth = aug.depth + 1;
    if (shaping != nullptr) {
      StepContext ctx;
      ctx.prior = &prior;
      ctx.belief_before = &aug.belief;
      ctx.s = aug.s;
      ctx.a = a;
      ctx.r = r;
      ctx.s_next = s_next;
      ctx.belief_after = &sc.aug.belief;
      sc.aug.stats = shaping->statistic.update(aug.stats, ctx);
      sc.f_value = shaping->f(aug.stats, ctx, sc.aug.stats);
    } else {
      sc.aug.stats = aug.stats;
    }
    total += p;
    out.push_back(std::move(sc));
  }
  if (out.empty())
    throw validation_error("no realizable outcome for (" + prior.state_label(aug.s) + ", " +
                           prior.action_label(a) + ")");
  if (std::fabs(total - 1.0) > 1e-9)
    throw validation_error("successor probabilities sum to " + std::to_string(total));
  return out;
}

PlanResult plan_bayes_optimal(const PriorMixture& prior, const AugmentedState& aug,
                              const PseudoReward* shaping, const PlannerConfig& cfg) {
  check_plan_args(prior, aug, shaping, cfg);
  Expectimax engine(prior, shaping, cfg, /*finite_objective=*/false);
  return engine.plan(aug);
}

PlanResult plan_finite_horizon(const PriorMixture& prior, const AugmentedState& aug,
                               const PseudoReward* shaping, int k, double tie_tol,
                               std::uint64_t node_limit) {
  PlannerConfig cfg;
  cfg.horizon = k;
  cfg.tie_tol = tie_tol;
  cfg.use_collapse_shortcut = false;
  cfg.r_max = prior.max_abs_reward();
  cfg.node_limit = node_limit;
  check_plan_args(prior, aug, shaping, cfg);
  Expectimax engine(prior, shaping, cfg, /*finite_objective=*/true);
  return engine.plan(aug);
}

Decomposition decompose_value(const PriorMixture& prior, const AugmentedState& aug,
                              const PlannerConfig& cfg) {
  Decomposition d;
  PlanResult total = plan_bayes_optimal(prior, aug, nullptr, cfg);
  AugmentedState fresh = initial_augmented_state(prior, aug.s, nullptr);
  PlanResult voo = plan_bayes_optimal(prior, fresh, nullptr, cfg);
  d.total = total.value;
  d.voo = voo.value;
  d.voi = total.value - voo.value;
  d.total_bound = total.error_bound;
  d.voo_bound = voo.error_bound;
  d.voi_bound = total.error_bound + voo.error_bound;
  d.negative_voi = d.voi < 0.0;
  return d;
}

}  // namespace bampf
