#include "bampf/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bampf {

namespace {

std::string idx_err(const char* what, int value, int limit) {
  return std::string(what) + " " + std::to_string(value) + " out of range [0, " +
         std::to_string(limit) + ")";
}

}  // namespace

RewardDist::RewardDist(std::vector<double> vals, std::vector<double> ps) {
  if (vals.size() != ps.size())
    throw argument_error("reward values and probabilities differ in length");
  if (vals.empty()) throw argument_error("reward distribution needs at least one value");
  std::vector<size_t> order(vals.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return vals[a] < vals[b]; });
  for (size_t k : order) {
    if (!(ps[k] >= 0.0)) throw argument_error("negative reward probability");
    if (!values.empty() && values.back() == vals[k]) {
      probs.back() += ps[k];
    } else {
      values.push_back(vals[k]);
      probs.push_back(ps[k]);
    }
  }
}

double RewardDist::mean() const {
  double m = 0.0;
  for (size_t k = 0; k < values.size(); ++k) m += values[k] * probs[k];
  return m;
}

double RewardDist::max_abs() const {
  double m = 0.0;
  for (size_t k = 0; k < values.size(); ++k)
    if (probs[k] > 0.0) m = std::max(m, std::fabs(values[k]));
  return m;
}

double RewardDist::prob_of(double v) const {
  for (size_t k = 0; k < values.size(); ++k)
    if (values[k] == v) return probs[k];
  return 0.0;
}

FiniteMdp FiniteMdp::shell(int n_states, int n_actions, double discount) {
  FiniteMdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.discount = discount;
  m.applicable.resize(n_states);
  m.table.resize(n_states);
  for (int s = 0; s < n_states; ++s) {
    m.applicable[s].resize(n_actions);
    std::iota(m.applicable[s].begin(), m.applicable[s].end(), 0);
    m.table[s].resize(n_actions);
  }
  m.initial_dist.assign(n_states, 0.0);
  if (n_states > 0) m.initial_dist[0] = 1.0;
  return m;
}

int FiniteMdp::slot_of(StateId s, ActionId a) const {
  const auto& acts = applicable[s];
  for (size_t k = 0; k < acts.size(); ++k)
    if (acts[k] == a) return static_cast<int>(k);
  return -1;
}

const std::vector<FiniteMdp::Outcome>& FiniteMdp::outcomes(StateId s, ActionId a) const {
  int slot = slot_of(s, a);
  if (slot < 0)
    throw argument_error("action " + action_label(a) + " not applicable in state " + state_label(s));
  return table[s][slot];
}

double FiniteMdp::transition_prob(StateId s, ActionId a, StateId next) const {
  double p = 0.0;
  for (const Outcome& o : outcomes(s, a))
    if (o.next == next) p += o.prob;
  return p;
}

RewardDist FiniteMdp::reward_on(StateId s, ActionId a, StateId next) const {
  for (const Outcome& o : outcomes(s, a))
    if (o.next == next) return o.reward;
  return RewardDist::point(0.0);
}

double FiniteMdp::expected_reward(StateId s, ActionId a) const {
  double r = 0.0;
  for (const Outcome& o : outcomes(s, a)) r += o.prob * o.reward.mean();
  return r;
}

double FiniteMdp::max_abs_reward() const {
  double m = 0.0;
  for (int s = 0; s < n_states; ++s)
    for (const auto& outs : table[s])
      for (const Outcome& o : outs)
        if (o.prob > 0.0) m = std::max(m, o.reward.max_abs());
  return m;
}

std::string FiniteMdp::state_label(StateId s) const {
  if (s >= 0 && s < static_cast<int>(state_names.size()) && !state_names[s].empty())
    return state_names[s];
  return "s" + std::to_string(s);
}

std::string FiniteMdp::action_label(ActionId a) const {
  if (a >= 0 && a < static_cast<int>(action_names.size()) && !action_names[a].empty())
    return action_names[a];
  return "a" + std::to_string(a);
}

void FiniteMdp::validate(double tol) const {
  if (n_states <= 0) throw validation_error("MDP needs at least one state");
  if (n_actions <= 0) throw validation_error("MDP needs at least one action");
  if (!(discount >= 0.0 && discount < 1.0))
    throw validation_error("discount must lie in [0, 1), got " + std::to_string(discount));
  if (static_cast<int>(applicable.size()) != n_states ||
      static_cast<int>(table.size()) != n_states)
    throw validation_error("per-state tables do not match n_states");
  if (static_cast<int>(initial_dist.size()) != n_states)
    throw validation_error("initial distribution length does not match n_states");

  double init_sum = 0.0;
  for (double p : initial_dist) {
    if (!(p >= 0.0)) throw validation_error("negative initial probability");
    init_sum += p;
  }
  if (std::fabs(init_sum - 1.0) > tol)
    throw validation_error("initial distribution sums to " + std::to_string(init_sum));

  for (int s = 0; s < n_states; ++s) {
    const auto& acts = applicable[s];
    if (acts.empty())
      throw validation_error("state " + state_label(s) + " has no applicable actions");
    if (!std::is_sorted(acts.begin(), acts.end()) ||
        std::adjacent_find(acts.begin(), acts.end()) != acts.end())
      throw validation_error("applicable actions at " + state_label(s) + " must be sorted and unique");
    for (ActionId a : acts)
      if (a < 0 || a >= n_actions)
        throw validation_error(idx_err("action id", a, n_actions) + " at state " + state_label(s));
    if (table[s].size() != acts.size())
      throw validation_error("outcome table at " + state_label(s) + " does not match applicable actions");

    for (size_t slot = 0; slot < acts.size(); ++slot) {
      const auto& outs = table[s][slot];
      if (outs.empty())
        throw validation_error("no outcomes for (" + state_label(s) + ", " +
                               action_label(acts[slot]) + ")");
      double row = 0.0;
      for (const Outcome& o : outs) {
        if (o.next < 0 || o.next >= n_states)
          throw validation_error(idx_err("successor state", o.next, n_states));
        if (!(o.prob >= 0.0)) throw validation_error("negative transition probability");
        row += o.prob;
        if (o.reward.values.empty())
          throw validation_error("empty reward distribution on (" + state_label(s) + ", " +
                                 action_label(acts[slot]) + ")");
        double rp = 0.0;
        for (double p : o.reward.probs) rp += p;
        if (std::fabs(rp - 1.0) > tol)
          throw validation_error("reward probabilities sum to " + std::to_string(rp) + " on (" +
                                 state_label(s) + ", " + action_label(acts[slot]) + ")");
      }
      if (std::fabs(row - 1.0) > tol)
        throw validation_error("transition row for (" + state_label(s) + ", " +
                               action_label(acts[slot]) + ") sums to " + std::to_string(row));
    }
  }
}

StationaryPolicy StationaryPolicy::deterministic(const FiniteMdp& m,
                                                 const std::vector<ActionId>& actions) {
  if (static_cast<int>(actions.size()) != m.n_states)
    throw argument_error("policy action list length does not match n_states");
  StationaryPolicy pi;
  pi.slot_probs.resize(m.n_states);
  for (int s = 0; s < m.n_states; ++s) {
    int slot = m.slot_of(s, actions[s]);
    if (slot < 0)
      throw argument_error("policy picks inapplicable action " + m.action_label(actions[s]) +
                           " at state " + m.state_label(s));
    pi.slot_probs[s].assign(m.applicable[s].size(), 0.0);
    pi.slot_probs[s][slot] = 1.0;
  }
  return pi;
}

bool StationaryPolicy::is_deterministic() const {
  for (const auto& row : slot_probs)
    for (double p : row)
      if (p != 0.0 && p != 1.0) return false;
  return true;
}

ActionId StationaryPolicy::action_at(const FiniteMdp& m, StateId s) const {
  const auto& row = slot_probs[s];
  for (size_t k = 0; k < row.size(); ++k)
    if (row[k] == 1.0) return m.applicable[s][k];
  throw argument_error("action_at called on a stochastic policy row");
}

void StationaryPolicy::validate(const FiniteMdp& m, double tol) const {
  if (static_cast<int>(slot_probs.size()) != m.n_states)
    throw validation_error("policy rows do not match n_states");
  for (int s = 0; s < m.n_states; ++s) {
    if (slot_probs[s].size() != m.applicable[s].size())
      throw validation_error("policy row at " + m.state_label(s) +
                             " does not match applicable actions");
    double sum = 0.0;
    for (double p : slot_probs[s]) {
      if (!(p >= 0.0)) throw validation_error("negative policy probability");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > tol)
      throw validation_error("policy row at " + m.state_label(s) + " sums to " + std::to_string(sum));
  }
}

}  // namespace bampf
