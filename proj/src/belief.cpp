#include "bampf/belief.hpp"

#include <cmath>

namespace bampf {

namespace {
constexpr double kClamp = 1e-15;
}

double PriorMixture::max_abs_reward() const {
  double m = 0.0;
  for (const FiniteMdp& c : candidates) m = std::max(m, c.max_abs_reward());
  return m;
}

void PriorMixture::validate() const {
  if (candidates.empty()) throw validation_error("prior needs at least one candidate MDP");
  if (weights.size() != candidates.size())
    throw validation_error("prior weights do not match candidate count");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw validation_error("negative prior weight");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw validation_error("prior weights sum to " + std::to_string(sum));

  const FiniteMdp& ref = candidates[0];
  for (const FiniteMdp& c : candidates) {
    c.validate();
    if (c.n_states != ref.n_states || c.n_actions != ref.n_actions)
      throw validation_error("candidates disagree on state or action spaces");
    if (c.discount != ref.discount)
      throw validation_error("candidates disagree on the discount factor");
    if (c.applicable != ref.applicable)
      throw validation_error("candidates disagree on applicable-action sets");
    if (c.initial_dist != ref.initial_dist)
      throw validation_error("candidates disagree on the initial distribution");
  }
}

Belief Belief::from_prior(const PriorMixture& prior) {
  Belief b;
  b.w = prior.weights;
  b.canonicalize();
  return b;
}

void Belief::canonicalize() {
  double sum = 0.0;
  for (double& x : w) {
    if (x < kClamp) x = 0.0;
    sum += x;
  }
  if (sum <= 0.0) throw validation_error("belief has no mass after clamping");
  for (double& x : w) x /= sum;
}

bool Belief::degenerate(int* which) const {
  int support = -1;
  for (size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) {
      if (support >= 0) return false;
      support = static_cast<int>(i);
    }
  }
  if (which != nullptr) *which = support;
  return support >= 0;
}

double Belief::entropy() const {
  double h = 0.0;
  for (double x : w)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

History History::extended(ActionId a, double r, StateId s) const {
  History h = *this;
  h.steps.push_back({a, r, s});
  return h;
}

Belief History::replay_posterior(const PriorMixture& prior) const {
  Belief b = Belief::from_prior(prior);
  StateId s = s0;
  for (const Step& st : steps) {
    b = posterior_update(prior, b, s, st.a, st.r, st.s);
    s = st.s;
  }
  return b;
}

void History::validate(const PriorMixture& prior) const {
  if (s0 < 0 || s0 >= prior.n_states()) throw validation_error("history initial state out of range");
  StateId s = s0;
  for (const Step& st : steps) {
    if (st.s < 0 || st.s >= prior.n_states())
      throw validation_error("history state out of range");
    if (prior.candidates[0].slot_of(s, st.a) < 0)
      throw validation_error("history action " + prior.action_label(st.a) +
                             " not applicable at " + prior.state_label(s));
    s = st.s;
  }
}

Belief posterior_update(const PriorMixture& prior, const Belief& b, StateId s, ActionId a,
                        double r, StateId s_next) {
  Belief out;
  out.w.resize(b.w.size());
  double total = 0.0;
  for (size_t i = 0; i < b.w.size(); ++i) {
    double lik = 0.0;
    if (b.w[i] > 0.0) {
      const FiniteMdp& c = prior.candidates[i];
      for (const auto& o : c.outcomes(s, a))
        if (o.next == s_next) lik += o.prob * o.reward.prob_of(r);
    }
    out.w[i] = b.w[i] * lik;
    total += out.w[i];
  }
  if (total <= 0.0)
    throw impossible_evidence_error("observation (" + prior.state_label(s) + ", " +
                                    prior.action_label(a) + ", r=" + std::to_string(r) + ", " +
                                    prior.state_label(s_next) +
                                    ") has zero likelihood under the belief support");
  for (double& x : out.w) x /= total;
  out.canonicalize();
  return out;
}

double mixture_expected_reward(const PriorMixture& prior, const Belief& b, StateId s, ActionId a) {
  double r = 0.0;
  for (size_t i = 0; i < b.w.size(); ++i)
    if (b.w[i] > 0.0) r += b.w[i] * prior.candidates[i].expected_reward(s, a);
  return r;
}

double predictive_state_prob(const PriorMixture& prior, const Belief& b, StateId s, ActionId a,
                             StateId s_next) {
  double p = 0.0;
  for (size_t i = 0; i < b.w.size(); ++i)
    if (b.w[i] > 0.0) p += b.w[i] * prior.candidates[i].transition_prob(s, a, s_next);
  return p;
}

double predictive_joint_prob(const PriorMixture& prior, const Belief& b, StateId s, ActionId a,
                             double r, StateId s_next) {
  double p = 0.0;
  for (size_t i = 0; i < b.w.size(); ++i) {
    if (b.w[i] <= 0.0) continue;
    const FiniteMdp& c = prior.candidates[i];
    for (const auto& o : c.outcomes(s, a))
      if (o.next == s_next) p += b.w[i] * o.prob * o.reward.prob_of(r);
  }
  return p;
}

}  // namespace bampf
