#include "bampf/certify.hpp"

#include <algorithm>
#include <cmath>

namespace bampf {

namespace {

// F values along the synthesized absorbing extension of a history-state:
// result[t] is F after appending t+1 absorbing steps (fresh action, reward 0,
// fresh state, no belief change). phi_hat = -sum_t gamma^t result[t] is the
// only potential that could make F potential-based, truncated at `steps`.
std::vector<double> absorbing_tail(const PseudoReward& f, const PriorMixture& prior,
                                   const Belief& belief, const StatValue& stats, StateId s,
                                   int steps) {
  const StateId s_abs = prior.n_states();
  const ActionId a_abs = prior.n_actions();
  std::vector<double> tail;
  tail.reserve(steps);
  StatValue cur = stats;
  StateId at = s;
  for (int t = 0; t < steps; ++t) {
    StepContext ctx;
    ctx.prior = &prior;
    ctx.belief_before = &belief;
    ctx.s = at;
    ctx.a = a_abs;
    ctx.r = 0.0;
    ctx.s_next = s_abs;
    ctx.belief_after = &belief;
    ctx.absorbing = true;
    StatValue next = f.statistic.update(cur, ctx);
    tail.push_back(f.f(cur, ctx, next));
    cur = std::move(next);
    at = s_abs;
  }
  return tail;
}

double discounted_sum(const std::vector<double>& xs, double gamma) {
  double acc = 0.0;
  double g = 1.0;
  for (double x : xs) {
    acc += g * x;
    g *= gamma;
  }
  return acc;
}

struct ScanFrame {
  History history;
  AugmentedState aug;
};

}  // namespace

BampfCertificate check_bampf(const PseudoReward& f, const PriorMixture& domain, int depth,
                             double tol, std::uint64_t node_budget) {
  domain.validate();
  if (depth < 1) throw argument_error("scan depth must be >= 1");
  if (!(tol > 0.0)) throw argument_error("tolerance must be positive");

  const double gamma = domain.discount();
  const bool claimed = f.claimed_potential.has_value();

  // Length of the absorbing rollout: gamma^steps * f_max / (1 - gamma) <= tol/4.
  int steps = 1;
  double trunc = 0.0;
  if (f.f_max > 0.0) {
    double target = 0.25 * tol;
    double bound = gamma * f.f_max / (1.0 - gamma);
    while (bound > target && steps < 1'000'000) {
      bound *= gamma;
      ++steps;
    }
    trunc = bound;
  }

  BampfCertificate cert;
  cert.depth = depth;
  cert.truncation_bound = trunc;
  const double threshold = claimed ? tol : 2.0 * trunc + tol;

  auto phi_at = [&](const AugmentedState& aug) {
    return f.claimed_potential->at(domain, aug.stats, aug.belief, aug.s);
  };
  auto phi_hat_at = [&](const AugmentedState& aug, std::vector<double>* tail_out) {
    std::vector<double> tail = absorbing_tail(f, domain, aug.belief, aug.stats, aug.s, steps);
    double phi_hat = -discounted_sum(tail, gamma);
    if (tail_out != nullptr) *tail_out = std::move(tail);
    return phi_hat;
  };

  // Depth-first scan of every realizable history of the domain.
  std::vector<ScanFrame> stack;
  for (int s0 = domain.n_states() - 1; s0 >= 0; --s0) {
    if (domain.initial_dist()[s0] <= 0.0) continue;
    ScanFrame frame;
    frame.history.s0 = s0;
    frame.aug = initial_augmented_state(domain, s0, &f);
    stack.push_back(std::move(frame));
  }

  bool budget_hit = false;
  while (!stack.empty()) {
    ScanFrame frame = std::move(stack.back());
    stack.pop_back();

    double phi_before = 0.0;
    std::vector<double> tail_pre;
    if (claimed)
      phi_before = phi_at(frame.aug);
    else
      phi_before = phi_hat_at(frame.aug, &tail_pre);

    for (ActionId a : domain.applicable(frame.aug.s)) {
      for (const Successor& sc : successor_distribution(domain, frame.aug, a, &f)) {
        if (cert.transitions_checked >= node_budget) {
          budget_hit = true;
          break;
        }
        ++cert.transitions_checked;

        double residual;
        if (claimed) {
          residual = sc.f_value - (gamma * phi_at(sc.aug) - phi_before);
        } else {
          residual = sc.f_value - (gamma * phi_hat_at(sc.aug, nullptr) - phi_before);
        }
        cert.max_residual = std::max(cert.max_residual, std::fabs(residual));

        if (std::fabs(residual) > threshold) {
          Witness w;
          w.history = frame.history;
          w.action = a;
          w.reward = sc.reward;
          w.next_state = sc.aug.s;
          w.f_step = sc.f_value;
          w.truncation_bound = trunc;
          // The counterexample transplant always uses the reconstruction
          // residual, even when the scan itself checked a claimed potential.
          std::vector<double> pre = claimed ? absorbing_tail(f, domain, frame.aug.belief,
                                                             frame.aug.stats, frame.aug.s, steps)
                                            : tail_pre;
          std::vector<double> post;
          double phi_hat_after = phi_hat_at(sc.aug, &post);
          double phi_hat_before = -discounted_sum(pre, gamma);
          w.delta = sc.f_value - (gamma * phi_hat_after - phi_hat_before);
          w.tail_pre = std::move(pre);
          w.tail_post = std::move(post);
          cert.verdict = BampfCertificate::Verdict::witness_found;
          cert.witness = std::move(w);
          return cert;
        }

        if (sc.aug.depth < depth) {
          ScanFrame next;
          next.history = frame.history.extended(a, sc.reward, sc.aug.s);
          next.aug = sc.aug;
          stack.push_back(std::move(next));
        }
      }
      if (budget_hit) break;
    }
    if (budget_hit) break;
  }

  cert.verdict = budget_hit ? BampfCertificate::Verdict::inconclusive
                            : BampfCertificate::Verdict::certified_bampf;
  return cert;
}

Counterexample build_necessity_counterexample(const Witness& witness, double discount,
                                              double tol) {
  if (!(discount > 0.0 && discount < 1.0)) throw argument_error("discount must lie in (0, 1)");
  if (!(tol > 0.0)) throw argument_error("tolerance must be positive");
  if (!(std::fabs(witness.delta) > 2.0 * witness.truncation_bound + tol))
    throw argument_error(
        "witness residual " + std::to_string(witness.delta) +
        " is not sound: |delta| must exceed 2 * truncation_bound + tol = " +
        std::to_string(2.0 * witness.truncation_bound + tol));

  const double delta = witness.delta;
  const double r_prime = witness.reward;

  FiniteMdp m;
  m.n_states = 3;
  m.n_actions = 2;
  m.discount = discount;
  m.state_names = {"s1", "s2", "s_abs"};
  m.action_names = {"a", "a_prime"};
  m.applicable = {{0, 1}, {0}, {0}};
  m.table.resize(3);
  m.table[0].resize(2);
  m.table[0][0] = {{2, 1.0, RewardDist::point(r_prime + delta / 2.0)}};
  m.table[0][1] = {{1, 1.0, RewardDist::point(r_prime)}};
  m.table[1] = {{{2, 1.0, RewardDist::point(0.0)}}};
  m.table[2] = {{{2, 1.0, RewardDist::point(0.0)}}};
  m.initial_dist = {1.0, 0.0, 0.0};

  Counterexample ce;
  ce.instance.candidates = {m};
  ce.instance.weights = {1.0};
  ce.instance.name = "necessity_counterexample";
  ce.instance.validate();

  // Rebase the witness pseudo-reward onto the instance's histories. The
  // statistic encodes the position in the two-branch skeleton; F replays the
  // recorded absorbing-tail values (0 beyond the stored truncation length).
  constexpr std::int64_t kBranchA = 1'000'000;
  constexpr std::int64_t kBranchB = 2'000'000;
  ShapingStatistic stat;
  stat.name = "skeleton_position";
  stat.initial = [](const PriorMixture&, StateId) { return StatValue{std::int64_t{0}}; };
  stat.update = [](const StatValue& st, const StepContext& ctx) {
    std::int64_t code = std::get<std::int64_t>(st);
    if (code == 0) return StatValue{ctx.a == 0 ? kBranchA + 1 : kBranchB};
    return StatValue{code + 1};
  };

  std::vector<double> pre = witness.tail_pre;
  std::vector<double> post = witness.tail_post;
  double f_step = witness.f_step;
  PseudoReward shaped;
  shaped.name = "rebased_" + std::to_string(delta);
  shaped.statistic = stat;
  shaped.f = [pre, post, f_step](const StatValue&, const StepContext&, const StatValue& after) {
    std::int64_t code = std::get<std::int64_t>(after);
    if (code >= kBranchB) {
      std::int64_t k = code - kBranchB;
      if (k == 0) return f_step;
      return k - 1 < static_cast<std::int64_t>(post.size()) ? post[k - 1] : 0.0;
    }
    std::int64_t k = code - kBranchA;
    return k - 1 < static_cast<std::int64_t>(pre.size()) ? pre[k - 1] : 0.0;
  };
  double fm = std::fabs(f_step);
  for (double x : pre) fm = std::max(fm, std::fabs(x));
  for (double x : post) fm = std::max(fm, std::fabs(x));
  shaped.f_max = fm;
  ce.shaping = std::move(shaped);

  ce.delta = delta;
  ce.r_prime = r_prime;
  ce.action_a = 0;
  ce.action_a_prime = 1;
  ce.predicted_unshaped = delta > 0.0 ? 0 : 1;
  ce.predicted_shaped = delta > 0.0 ? 1 : 0;
  return ce;
}

}  // namespace bampf
