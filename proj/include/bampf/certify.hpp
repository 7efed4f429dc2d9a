#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bampf/planner.hpp"

namespace bampf {

/**
 * A realizable transition whose pseudo-reward cannot be written as
 * discount * phi(h') - phi(h) for any bounded potential phi. The tail vectors
 * record F along the synthesized absorbing extension of h and h' (index t
 * holds F after t+1 absorbing steps); they are what the counterexample
 * builder needs to transplant the disagreement into a fresh instance.
 */
struct Witness {
  History history;          // h, ending at the transition's source state
  ActionId action = 0;
  double reward = 0.0;
  StateId next_state = 0;
  double delta = 0.0;       // F(h') - (discount * phi(h') - phi(h))
  double f_step = 0.0;      // F on the witness transition itself
  std::vector<double> tail_pre;    // F along h + absorbing steps
  std::vector<double> tail_post;   // F along h' + absorbing steps
  double truncation_bound = 0.0;
};

struct BampfCertificate {
  enum class Verdict { certified_bampf, witness_found, inconclusive };

  Verdict verdict = Verdict::inconclusive;
  std::optional<Witness> witness;
  double max_residual = 0.0;       // largest |delta| seen over scanned transitions
  double truncation_bound = 0.0;   // absorbing-rollout truncation error bound
  std::uint64_t transitions_checked = 0;
  int depth = 0;
};

/**
 * Decide whether a pseudo-reward is potential-based over the given domain.
 *
 * With a claimed potential the identity F = discount*phi' - phi is replayed
 * over every realizable history of the domain up to `depth`. Without one, the
 * only potential that could work is reconstructed from F's values along a
 * synthesized absorbing extension (one fresh state, one fresh action, zero
 * reward, no information), truncated once its tail bound drops to tol/4; a
 * residual |delta| > 2 * truncation_bound + tol on any scanned transition is
 * a sound witness. Scans cut short by `node_budget` return inconclusive.
 */
BampfCertificate check_bampf(const PseudoReward& f, const PriorMixture& domain, int depth,
                             double tol = 1e-9, std::uint64_t node_budget = 2'000'000);

/**
 * The canonical three-state instance exposing a witnessed non-potential
 * pseudo-reward: from s1 action a moves to the absorbing state with reward
 * r' + delta/2 while a' moves to s2 with reward r'; s2 and the absorbing
 * state only allow a (reward 0). The pseudo-reward is the witness context
 * rebased onto these histories, so planning the instance shaped and unshaped
 * yields initial actions that disagree.
 */
struct Counterexample {
  PriorMixture instance;        // single candidate, deterministic
  PseudoReward shaping;         // witness pseudo-reward rebased onto the instance
  ActionId action_a = 0;        // the absorbing-path action
  ActionId action_a_prime = 1;  // the witness-path action
  ActionId predicted_unshaped = 0;
  ActionId predicted_shaped = 1;
  double delta = 0.0;
  double r_prime = 0.0;
};

/**
 * Build the instance above from a certifier witness. Refuses (argument_error)
 * witnesses whose residual is not sound: |delta| must exceed
 * 2 * truncation_bound + tol.
 */
Counterexample build_necessity_counterexample(const Witness& witness, double discount,
                                              double tol = 1e-9);

}  // namespace bampf
