#include "bampf/shaping.hpp"

#include <algorithm>
#include <cmath>

namespace bampf {

namespace {

void hash_mix(std::size_t& h, std::uint64_t v) {
  // FNV-1a over the 8 bytes of v.
  for (int k = 0; k < 8; ++k) {
    h ^= (v >> (8 * k)) & 0xffu;
    h *= 1099511628211ull;
  }
}

std::uint64_t bits_of(double d) {
  std::uint64_t u;
  static_assert(sizeof(u) == sizeof(d));
  __builtin_memcpy(&u, &d, sizeof(u));
  return u;
}

// Bitmask over an id universe, stored as 64-bit words.
std::vector<std::int64_t> empty_mask(int universe) {
  return std::vector<std::int64_t>((universe + 63) / 64, 0);
}

void mask_set(std::vector<std::int64_t>& m, int id) {
  m[id / 64] |= std::int64_t{1} << (id % 64);
}

int mask_count(const std::vector<std::int64_t>& m) {
  int n = 0;
  for (std::int64_t w : m) n += __builtin_popcountll(static_cast<std::uint64_t>(w));
  return n;
}

PseudoReward with_potential(std::string name, Potential pot, double discount) {
  PseudoReward pr = make_bampf(std::move(pot), discount);
  pr.name = std::move(name);
  return pr;
}

}  // namespace

std::size_t hash_stat(const StatValue& v) {
  std::size_t h = 1469598103934665603ull;
  hash_mix(h, v.index());
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    hash_mix(h, static_cast<std::uint64_t>(*i));
  } else if (const auto* d = std::get_if<double>(&v)) {
    hash_mix(h, bits_of(*d));
  } else if (const auto* vec = std::get_if<std::vector<std::int64_t>>(&v)) {
    for (std::int64_t x : *vec) hash_mix(h, static_cast<std::uint64_t>(x));
  }
  return h;
}

PseudoReward make_bampf(Potential potential, double discount) {
  if (!(discount >= 0.0 && discount < 1.0))
    throw argument_error("discount must lie in [0, 1)");
  if (!(potential.phi_max >= 0.0) || !std::isfinite(potential.phi_max))
    throw argument_error("potential needs a finite nonnegative phi_max");

  PseudoReward pr;
  pr.name = potential.statistic.name + "_bampf";
  pr.statistic = potential.statistic;
  pr.f_max = (1.0 + discount) * potential.phi_max;
  Potential pot = potential;
  pr.f = [pot, discount](const StatValue& before, const StepContext& ctx, const StatValue& after) {
    double phi_before = pot.phi(before, *ctx.belief_before, ctx.s, *ctx.prior);
    double phi_after = pot.phi(after, *ctx.belief_after, ctx.s_next, *ctx.prior);
    return discount * phi_after - phi_before;
  };
  pr.claimed_potential = std::move(potential);
  return pr;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "state_potential_pbsf", "unique_state_count", "information_gain", "entropy_bonus",
      "subgoal_count",        "negative_surprise",  "prediction_error"};
  return names;
}

PseudoReward make_builtin(const std::string& name, const PriorMixture& prior,
                          const BuiltinParams& params) {
  prior.validate();
  const double beta = params.scale;
  const double gamma = prior.discount();
  // One spare state and action so certifier extensions stay in range.
  const int state_universe = prior.n_states() + 1;
  const int action_universe = prior.n_actions() + 1;

  ShapingStatistic none;
  none.name = "none";
  none.initial = [](const PriorMixture&, StateId) { return StatValue{std::monostate{}}; };
  none.update = [](const StatValue& st, const StepContext&) { return st; };

  if (name == "state_potential_pbsf") {
    if (static_cast<int>(params.phi_table.size()) != prior.n_states())
      throw argument_error("state_potential_pbsf needs a phi_table entry per state");
    std::vector<double> table = params.phi_table;
    table.push_back(0.0);   // synthesized absorbing state is phi-neutral
    double bound = 0.0;
    for (double x : table) bound = std::max(bound, std::fabs(beta * x));
    Potential pot;
    pot.statistic = none;
    pot.statistic.name = "state_potential";
    pot.statistic.stationary_after_collapse = false;
    pot.phi = [table, beta](const StatValue&, const Belief&, StateId s, const PriorMixture&) {
      return beta * table[s];
    };
    pot.phi_max = bound;
    return with_potential("state_potential_pbsf", std::move(pot), gamma);
  }

  if (name == "unique_state_count") {
    const int modulo = params.state_modulo;
    const int universe = modulo > 0 ? modulo : state_universe;
    auto project = [modulo](StateId s) { return modulo > 0 ? s % modulo : s; };
    ShapingStatistic stat;
    stat.name = "visited_set";
    stat.stationary_after_collapse = false;
    stat.initial = [universe, project](const PriorMixture&, StateId s0) {
      auto m = empty_mask(universe);
      mask_set(m, project(s0));
      return StatValue{std::move(m)};
    };
    stat.update = [project](const StatValue& st, const StepContext& ctx) {
      auto m = std::get<std::vector<std::int64_t>>(st);
      mask_set(m, project(ctx.s_next));
      return StatValue{std::move(m)};
    };
    Potential pot;
    pot.statistic = stat;
    pot.phi = [beta](const StatValue& st, const Belief&, StateId, const PriorMixture&) {
      return beta * mask_count(std::get<std::vector<std::int64_t>>(st));
    };
    pot.phi_max = std::fabs(beta) * universe;
    return with_potential("unique_state_count", std::move(pot), gamma);
  }

  if (name == "information_gain") {
    Potential pot;
    pot.statistic = none;
    pot.statistic.name = "posterior_entropy";
    pot.statistic.stationary_after_collapse = true;   // entropy stays 0 once degenerate
    pot.phi = [beta](const StatValue&, const Belief& b, StateId, const PriorMixture&) {
      return -beta * b.entropy();
    };
    pot.phi_max = std::fabs(beta) * std::log(std::max(2, prior.n_candidates()));
    return with_potential("information_gain", std::move(pot), gamma);
  }

  if (name == "entropy_bonus") {
    const int SA = state_universe * action_universe;
    ShapingStatistic stat;
    stat.name = "state_action_counts";
    stat.stationary_after_collapse = false;
    stat.initial = [SA](const PriorMixture&, StateId) {
      return StatValue{std::vector<std::int64_t>(SA, 0)};
    };
    stat.update = [action_universe](const StatValue& st, const StepContext& ctx) {
      auto counts = std::get<std::vector<std::int64_t>>(st);
      counts[ctx.s * action_universe + ctx.a] += 1;
      return StatValue{std::move(counts)};
    };
    Potential pot;
    pot.statistic = stat;
    pot.phi = [beta, action_universe, state_universe](const StatValue& st, const Belief&, StateId,
                                                      const PriorMixture&) {
      // Empirical conditional action entropy H(a|s) from the counts.
      const auto& counts = std::get<std::vector<std::int64_t>>(st);
      std::int64_t total = 0;
      for (std::int64_t c : counts) total += c;
      if (total == 0) return 0.0;
      double h = 0.0;
      for (int s = 0; s < state_universe; ++s) {
        std::int64_t ns = 0;
        for (int a = 0; a < action_universe; ++a) ns += counts[s * action_universe + a];
        if (ns == 0) continue;
        double hs = 0.0;
        for (int a = 0; a < action_universe; ++a) {
          std::int64_t c = counts[s * action_universe + a];
          if (c == 0) continue;
          double p = static_cast<double>(c) / static_cast<double>(ns);
          hs -= p * std::log(p);
        }
        h += (static_cast<double>(ns) / static_cast<double>(total)) * hs;
      }
      return beta * h;
    };
    pot.phi_max = std::fabs(beta) * std::log(std::max(2, action_universe));
    return with_potential("entropy_bonus", std::move(pot), gamma);
  }

  if (name == "subgoal_count") {
    if (params.subgoals.empty())
      throw argument_error("subgoal_count needs a nonempty subgoal set");
    std::vector<int> goal_of(state_universe, -1);
    for (size_t k = 0; k < params.subgoals.size(); ++k) {
      int s = params.subgoals[k];
      if (s < 0 || s >= prior.n_states())
        throw argument_error("subgoal state " + std::to_string(s) + " out of range");
      goal_of[s] = static_cast<int>(k);
    }
    const int n_goals = static_cast<int>(params.subgoals.size());
    ShapingStatistic stat;
    stat.name = "subgoals_reached";
    stat.stationary_after_collapse = false;
    stat.initial = [goal_of, n_goals](const PriorMixture&, StateId s0) {
      auto m = empty_mask(n_goals);
      if (goal_of[s0] >= 0) mask_set(m, goal_of[s0]);
      return StatValue{std::move(m)};
    };
    stat.update = [goal_of](const StatValue& st, const StepContext& ctx) {
      auto m = std::get<std::vector<std::int64_t>>(st);
      if (goal_of[ctx.s_next] >= 0) mask_set(m, goal_of[ctx.s_next]);
      return StatValue{std::move(m)};
    };
    Potential pot;
    pot.statistic = stat;
    pot.phi = [beta](const StatValue& st, const Belief&, StateId, const PriorMixture&) {
      return beta * mask_count(std::get<std::vector<std::int64_t>>(st));
    };
    pot.phi_max = std::fabs(beta) * n_goals;
    return with_potential("subgoal_count", std::move(pot), gamma);
  }

  if (name == "negative_surprise") {
    const double floor = params.min_predictive_prob;
    if (!(floor > 0.0 && floor <= 1.0))
      throw argument_error("min_predictive_prob must lie in (0, 1]");
    // Statistic: clamped log predictive probability of the latest state.
    ShapingStatistic stat;
    stat.name = "last_log_predictive";
    stat.stationary_after_collapse = false;
    stat.initial = [](const PriorMixture&, StateId) { return StatValue{0.0}; };
    stat.update = [floor](const StatValue&, const StepContext& ctx) {
      if (ctx.absorbing) return StatValue{0.0};
      double p = predictive_state_prob(*ctx.prior, *ctx.belief_before, ctx.s, ctx.a, ctx.s_next);
      return StatValue{std::log(std::max(p, floor))};
    };
    Potential pot;
    pot.statistic = stat;
    pot.phi = [beta](const StatValue& st, const Belief&, StateId, const PriorMixture&) {
      return beta * std::get<double>(st);
    };
    pot.phi_max = std::fabs(beta) * std::fabs(std::log(floor));
    return with_potential("negative_surprise", std::move(pot), gamma);
  }

  if (name == "prediction_error") {
    PseudoReward pr;
    pr.name = "prediction_error";
    pr.statistic = none;
    pr.statistic.name = "prediction_error";
    // Largest surprisal of a realizable transition: the predictive probability
    // is at least (smallest surviving belief weight) * (smallest positive
    // one-step likelihood under a single candidate); canonical beliefs keep
    // surviving weights at or above the 1e-15 clamp.
    double min_pos = 1.0;
    for (const FiniteMdp& c : prior.candidates)
      for (int s = 0; s < c.n_states; ++s)
        for (const auto& outs : c.table[s])
          for (const auto& o : outs)
            for (size_t k = 0; k < o.reward.values.size(); ++k) {
              double p = o.prob * o.reward.probs[k];
              if (p > 0.0) min_pos = std::min(min_pos, p);
            }
    pr.f_max = std::fabs(beta) * std::fabs(std::log(1e-15 * min_pos));
    pr.f = [beta](const StatValue&, const StepContext& ctx, const StatValue&) {
      if (ctx.absorbing) return 0.0;
      double p = predictive_joint_prob(*ctx.prior, *ctx.belief_before, ctx.s, ctx.a, ctx.r,
                                       ctx.s_next);
      return -beta * std::log(p);
    };
    return pr;
  }

  throw argument_error("unknown builtin pseudo-reward: " + name);
}

}  // namespace bampf
