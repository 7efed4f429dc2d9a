#include "bampf/dp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace bampf {

namespace {

constexpr int kDirectSolveLimit = 1000;
constexpr int kMaxSweeps = 2'000'000;

double bellman_residual(const FiniteMdp& m, const StationaryPolicy& pi,
                        const std::vector<double>& v) {
  double res = 0.0;
  for (int s = 0; s < m.n_states; ++s) {
    double tv = 0.0;
    for (size_t slot = 0; slot < m.applicable[s].size(); ++slot) {
      double w = pi.slot_probs[s][slot];
      if (w == 0.0) continue;
      double q = 0.0;
      for (const auto& o : m.table[s][slot])
        q += o.prob * (o.reward.mean() + m.discount * v[o.next]);
      tv += w * q;
    }
    res = std::max(res, std::fabs(tv - v[s]));
  }
  return res;
}

std::vector<std::vector<double>> action_values(const FiniteMdp& m, const std::vector<double>& v) {
  std::vector<std::vector<double>> q(m.n_states);
  for (int s = 0; s < m.n_states; ++s) {
    q[s].resize(m.applicable[s].size());
    for (size_t slot = 0; slot < m.applicable[s].size(); ++slot) {
      double acc = 0.0;
      for (const auto& o : m.table[s][slot])
        acc += o.prob * (o.reward.mean() + m.discount * v[o.next]);
      q[s][slot] = acc;
    }
  }
  return q;
}

}  // namespace

ValueFunction policy_evaluation(const FiniteMdp& m, const StationaryPolicy& pi, double tol) {
  m.validate();
  pi.validate(m);
  if (!(tol > 0.0)) throw argument_error("tolerance must be positive");

  std::vector<double> v(m.n_states, 0.0);
  if (m.n_states <= kDirectSolveLimit) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m.n_states, m.n_states);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m.n_states);
    for (int s = 0; s < m.n_states; ++s) {
      for (size_t slot = 0; slot < m.applicable[s].size(); ++slot) {
        double w = pi.slot_probs[s][slot];
        if (w == 0.0) continue;
        for (const auto& o : m.table[s][slot]) {
          A(s, o.next) -= m.discount * w * o.prob;
          b(s) += w * o.prob * o.reward.mean();
        }
      }
    }
    Eigen::VectorXd x = A.partialPivLu().solve(b);
    for (int s = 0; s < m.n_states; ++s) v[s] = x(s);
  }
  // Iterative refinement doubles as the large-state path and as a guard for
  // the (rare) case the direct solve leaves residual above tol.
  if (bellman_residual(m, pi, v) > tol) {
    double shrink = m.discount > 0.0 ? m.discount / (1.0 - m.discount) : 0.0;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      double step = 0.0;
      std::vector<double> nv(m.n_states, 0.0);
      for (int s = 0; s < m.n_states; ++s) {
        double tv = 0.0;
        for (size_t slot = 0; slot < m.applicable[s].size(); ++slot) {
          double w = pi.slot_probs[s][slot];
          if (w == 0.0) continue;
          for (const auto& o : m.table[s][slot])
            tv += w * o.prob * (o.reward.mean() + m.discount * v[o.next]);
        }
        nv[s] = tv;
        step = std::max(step, std::fabs(tv - v[s]));
      }
      v.swap(nv);
      if (step * shrink <= tol || step == 0.0) break;
    }
  }

  ValueFunction vf;
  vf.v = std::move(v);
  vf.q = action_values(m, vf.v);
  return vf;
}

ViResult value_iteration(const FiniteMdp& m, double tol) {
  m.validate();
  if (!(tol > 0.0)) throw argument_error("tolerance must be positive");

  std::vector<double> v(m.n_states, 0.0);
  double shrink = m.discount > 0.0 ? m.discount / (1.0 - m.discount) : 0.0;
  int iters = 0;
  for (; iters < kMaxSweeps; ++iters) {
    double step = 0.0;
    std::vector<double> nv(m.n_states);
    for (int s = 0; s < m.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (size_t slot = 0; slot < m.applicable[s].size(); ++slot) {
        double q = 0.0;
        for (const auto& o : m.table[s][slot])
          q += o.prob * (o.reward.mean() + m.discount * v[o.next]);
        best = std::max(best, q);
      }
      nv[s] = best;
      step = std::max(step, std::fabs(best - v[s]));
    }
    v.swap(nv);
    if (step * shrink <= tol || step == 0.0) {
      ++iters;
      break;
    }
  }

  ViResult out;
  out.vf.v = std::move(v);
  out.vf.q = action_values(m, out.vf.v);
  out.iterations = iters;
  out.greedy.slot_probs.resize(m.n_states);
  for (int s = 0; s < m.n_states; ++s) {
    const auto& qs = out.vf.q[s];
    size_t best = 0;
    for (size_t slot = 1; slot < qs.size(); ++slot)
      if (qs[slot] > qs[best]) best = slot;   // strict: ties keep the lowest id
    out.greedy.slot_probs[s].assign(qs.size(), 0.0);
    out.greedy.slot_probs[s][best] = 1.0;
  }
  return out;
}

double count_deterministic_policies(const FiniteMdp& m) {
  double count = 1.0;
  for (int s = 0; s < m.n_states; ++s) count *= static_cast<double>(m.applicable[s].size());
  return count;
}

std::vector<StationaryPolicy> enumerate_deterministic_policies(const FiniteMdp& m,
                                                               std::uint64_t limit) {
  m.validate();
  double count = count_deterministic_policies(m);
  if (count > static_cast<double>(limit))
    throw capacity_error("deterministic policy count " + std::to_string(count) +
                         " exceeds limit " + std::to_string(limit));

  std::vector<StationaryPolicy> out;
  out.reserve(static_cast<size_t>(count));
  std::vector<size_t> slots(m.n_states, 0);
  while (true) {
    StationaryPolicy pi;
    pi.slot_probs.resize(m.n_states);
    for (int s = 0; s < m.n_states; ++s) {
      pi.slot_probs[s].assign(m.applicable[s].size(), 0.0);
      pi.slot_probs[s][slots[s]] = 1.0;
    }
    out.push_back(std::move(pi));
    int s = m.n_states - 1;
    for (; s >= 0; --s) {
      if (++slots[s] < m.applicable[s].size()) break;
      slots[s] = 0;
    }
    if (s < 0) break;
  }
  return out;
}

FiniteMdp episodic_wrapper(const FiniteMdp& m, int episode_length) {
  m.validate();
  if (episode_length < 1) throw argument_error("episode_length must be >= 1");

  const int S = m.n_states;
  const int L = episode_length;
  FiniteMdp w;
  w.n_states = S * L;
  w.n_actions = m.n_actions;
  w.discount = m.discount;
  w.action_names = m.action_names;
  w.applicable.resize(w.n_states);
  w.table.resize(w.n_states);
  w.initial_dist.assign(w.n_states, 0.0);
  w.state_names.resize(w.n_states);

  for (int s = 0; s < S; ++s) w.initial_dist[s] = m.initial_dist[s];

  for (int k = 0; k < L; ++k) {
    for (int s = 0; s < S; ++s) {
      int ws = k * S + s;
      w.state_names[ws] = m.state_label(s) + "@" + std::to_string(k);
      w.applicable[ws] = m.applicable[s];
      w.table[ws].resize(m.applicable[s].size());
      for (size_t slot = 0; slot < m.applicable[s].size(); ++slot) {
        auto& outs = w.table[ws][slot];
        if (k + 1 < L) {
          for (const auto& o : m.table[s][slot])
            outs.push_back({(k + 1) * S + o.next, o.prob, o.reward});
        } else {
          // The reset successor is drawn from the initial distribution
          // independently of the physical landing, so every reset edge
          // carries the same physical-landing reward mixture.
          std::vector<double> vals, ps;
          for (const auto& o : m.table[s][slot])
            for (size_t i = 0; i < o.reward.values.size(); ++i) {
              vals.push_back(o.reward.values[i]);
              ps.push_back(o.prob * o.reward.probs[i]);
            }
          RewardDist mixed(std::move(vals), std::move(ps));
          for (int s0 = 0; s0 < S; ++s0) {
            if (m.initial_dist[s0] == 0.0) continue;
            outs.push_back({s0, m.initial_dist[s0], mixed});
          }
        }
      }
    }
  }
  return w;
}

}  // namespace bampf
