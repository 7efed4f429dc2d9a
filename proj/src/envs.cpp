#include "bampf/envs.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <set>

#include "json.hpp"

#include "bampf/dp.hpp"

namespace bampf {

namespace {

using nlohmann::json;

void set_outcome(FiniteMdp& m, StateId s, ActionId a, StateId next, RewardDist r) {
  m.table[s][m.slot_of(s, a)].push_back({next, 1.0, std::move(r)});
}

Environment make_caterpillar() {
  const StateId s_w = 0, s_b = 1;
  const ActionId stay = 0, go = 1;

  FiniteMdp base = FiniteMdp::shell(2, 2, 0.95);
  base.state_names = {"s_w", "s_b"};
  base.action_names = {"stay", "go"};
  base.initial_dist = {1.0, 0.0};
  set_outcome(base, s_w, stay, s_w, RewardDist::point(21.0));
  set_outcome(base, s_w, go, s_b, RewardDist::point(-5.0));
  set_outcome(base, s_b, go, s_w, RewardDist::point(-5.0));

  FiniteMdp full = base;   // bush has food
  FiniteMdp empty = base;  // bush is empty
  set_outcome(full, s_b, stay, s_b, RewardDist::point(150.0));
  set_outcome(empty, s_b, stay, s_b, RewardDist::point(0.0));

  Environment env;
  env.prior.name = "caterpillar";
  env.prior.candidates = {std::move(full), std::move(empty)};
  env.prior.weights = {0.1, 0.9};
  return env;
}

Environment make_goal_grid(int w, int h, int gx, int gy, double discount) {
  if (w < 1 || h < 1) throw argument_error("grid dimensions must be positive");
  if (gx < 0) gx = w - 1;
  if (gy < 0) gy = h - 1;
  if (gx >= w || gy >= h) throw argument_error("goal cell outside the grid");

  const int n = w * h;
  const StateId goal = gy * w + gx;
  FiniteMdp m = FiniteMdp::shell(n, 4, discount);
  m.action_names = {"up", "down", "left", "right"};
  m.initial_dist.assign(n, 0.0);
  m.initial_dist[0] = 1.0;

  Environment env;
  env.annotations.goal_state = goal;
  env.annotations.phi_table.resize(n);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const StateId s = y * w + x;
      m.state_names.push_back("(" + std::to_string(x) + "," + std::to_string(y) + ")");
      env.annotations.phi_table[s] = -(std::abs(x - gx) + std::abs(y - gy));
      for (ActionId a = 0; a < 4; ++a) {
        int nx = x + (a == 2 ? -1 : a == 3 ? 1 : 0);
        int ny = y + (a == 0 ? -1 : a == 1 ? 1 : 0);
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) {
          nx = x;
          ny = y;
        }
        StateId next = s == goal ? goal : ny * w + nx;  // goal is absorbing
        set_outcome(m, s, a, next, RewardDist::point(s == goal ? 1.0 : 0.0));
      }
    }

  env.prior.name = "goal_grid";
  env.prior.candidates = {std::move(m)};
  env.prior.weights = {1.0};
  return env;
}

Environment make_unique_grid(int w, int h, double discount) {
  Environment flat = make_goal_grid(w, h, -1, -1, discount);
  const int episode = 50;
  FiniteMdp wrapped = episodic_wrapper(flat.prior.candidates[0], episode);

  Environment env;
  env.prior.name = "unique_grid";
  env.prior.candidates = {std::move(wrapped)};
  env.prior.weights = {1.0};
  env.annotations = flat.annotations;
  env.annotations.episode_length = episode;
  return env;
}

Environment make_noisy_tv(int corridor_len, int channels, double discount) {
  if (corridor_len < 3) throw argument_error("noisy_tv needs a corridor of at least 3 cells");
  if (channels < 1) throw argument_error("noisy_tv needs at least one channel");

  // Cell 0 is the start, cell 1 carries the channel component (one state per
  // channel), cells 2..L-1 follow, the last cell is the absorbing goal.
  const int n = 1 + channels + (corridor_len - 2);
  auto tv_state = [&](int c) { return 1 + c; };
  auto cell_state = [&](int cell) { return cell == 0 ? 0 : channels + cell - 1; };
  const StateId goal = cell_state(corridor_len - 1);

  FiniteMdp m = FiniteMdp::shell(n, 3, discount);
  m.action_names = {"stay", "left", "right"};
  m.initial_dist.assign(n, 0.0);
  m.initial_dist[0] = 1.0;
  m.state_names.resize(n);
  m.state_names[0] = "cell0";
  for (int c = 0; c < channels; ++c) m.state_names[tv_state(c)] = "tv_ch" + std::to_string(c);
  for (int cell = 2; cell < corridor_len; ++cell)
    m.state_names[cell_state(cell)] = "cell" + std::to_string(cell);

  auto add_uniform_tv = [&](StateId from, ActionId a) {
    for (int c = 0; c < channels; ++c)
      m.table[from][a].push_back({tv_state(c), 1.0 / channels, RewardDist::point(0.0)});
  };

  // Start cell: stay/left bump in place, right enters the TV.
  set_outcome(m, 0, 0, 0, RewardDist::point(0.0));
  set_outcome(m, 0, 1, 0, RewardDist::point(0.0));
  add_uniform_tv(0, 2);
  // TV channel states: staying retunes the channel, left/right leave.
  for (int c = 0; c < channels; ++c) {
    const StateId s = tv_state(c);
    add_uniform_tv(s, 0);
    set_outcome(m, s, 1, 0, RewardDist::point(0.0));
    set_outcome(m, s, 2, cell_state(2), RewardDist::point(0.0));
  }
  // Remaining corridor. The goal pays 1 per step and absorbs.
  for (int cell = 2; cell < corridor_len; ++cell) {
    const StateId s = cell_state(cell);
    if (s == goal) {
      for (ActionId a = 0; a < 3; ++a) set_outcome(m, s, a, goal, RewardDist::point(1.0));
      continue;
    }
    set_outcome(m, s, 0, s, RewardDist::point(0.0));
    if (cell == 2)
      add_uniform_tv(s, 1);
    else
      set_outcome(m, s, 1, cell_state(cell - 1), RewardDist::point(0.0));
    set_outcome(m, s, 2, cell_state(cell + 1), RewardDist::point(0.0));
  }

  Environment env;
  env.prior.name = "noisy_tv";
  env.prior.candidates = {std::move(m)};
  env.prior.weights = {1.0};
  env.annotations.goal_state = goal;
  for (int c = 0; c < channels; ++c) env.annotations.tv_states.push_back(tv_state(c));
  return env;
}

Environment make_noisy_coin(double discount) {
  FiniteMdp heads = FiniteMdp::shell(1, 1, discount);
  heads.state_names = {"s0"};
  heads.action_names = {"flip"};
  heads.initial_dist = {1.0};
  heads.table[0][0].push_back({0, 1.0, RewardDist({1.0, -1.0}, {0.8, 0.2})});

  FiniteMdp tails = heads;
  tails.table[0][0].back().reward = RewardDist({1.0, -1.0}, {0.2, 0.8});

  Environment env;
  env.prior.name = "noisy_coin";
  env.prior.candidates = {std::move(heads), std::move(tails)};
  env.prior.weights = {0.5, 0.5};
  return env;
}

Environment make_necessity(double r_prime, double delta, double discount) {
  FiniteMdp m = FiniteMdp::shell(3, 2, discount);
  m.state_names = {"s1", "s2", "s_abs"};
  m.action_names = {"a", "a_prime"};
  m.applicable = {{0, 1}, {0}, {0}};
  m.table = {{{}, {}}, {{}}, {{}}};
  m.initial_dist = {1.0, 0.0, 0.0};
  set_outcome(m, 0, 0, 2, RewardDist::point(r_prime + delta / 2.0));
  set_outcome(m, 0, 1, 1, RewardDist::point(r_prime));
  set_outcome(m, 1, 0, 2, RewardDist::point(0.0));
  set_outcome(m, 2, 0, 2, RewardDist::point(0.0));

  Environment env;
  env.prior.name = "necessity";
  env.prior.candidates = {std::move(m)};
  env.prior.weights = {1.0};
  return env;
}

json reward_to_json(const RewardDist& r) {
  return json{{"values", r.values}, {"probs", r.probs}};
}

const json& at_path(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw validation_error(path + ": missing field '" + key + "'");
  return *it;
}

template <typename T>
T get_path(const json& j, const char* key, const std::string& path) {
  try {
    return at_path(j, key, path).get<T>();
  } catch (const json::exception& e) {
    throw validation_error(path + "." + key + ": " + e.what());
  }
}

}  // namespace

Environment make_benchmark(const std::string& name, const BenchmarkParams& p) {
  auto gamma = [&](double fallback) { return p.discount < 0.0 ? fallback : p.discount; };
  Environment env;
  if (name == "caterpillar") {
    env = make_caterpillar();
    if (p.discount >= 0.0)
      for (auto& c : env.prior.candidates) c.discount = p.discount;
  } else if (name == "goal_grid") {
    env = make_goal_grid(p.width, p.height, p.goal_x, p.goal_y, gamma(0.99));
  } else if (name == "unique_grid") {
    env = make_unique_grid(p.width, p.height, gamma(0.99));
  } else if (name == "noisy_tv") {
    env = make_noisy_tv(p.corridor_len, p.channels, gamma(0.9));
  } else if (name == "noisy_coin") {
    env = make_noisy_coin(gamma(0.9));
  } else if (name == "necessity") {
    env = make_necessity(p.r_prime, p.delta, gamma(0.95));
  } else {
    throw argument_error("unknown benchmark '" + name + "'");
  }
  env.prior.validate();
  return env;
}

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names = {"caterpillar", "goal_grid", "unique_grid",
                                                 "noisy_tv",    "noisy_coin", "necessity"};
  return names;
}

std::string save_env_spec(const Environment& env) {
  const PriorMixture& prior = env.prior;
  json doc;
  doc["schema_version"] = 1;
  doc["name"] = prior.name;
  doc["discount"] = prior.discount();
  doc["states"] = json::array();
  for (StateId s = 0; s < prior.n_states(); ++s) doc["states"].push_back(prior.state_label(s));
  doc["actions"] = json::array();
  for (ActionId a = 0; a < prior.n_actions(); ++a) doc["actions"].push_back(prior.action_label(a));
  doc["applicable"] = prior.candidates[0].applicable;
  doc["initial_dist"] = prior.initial_dist();
  doc["weights"] = prior.weights;

  doc["candidates"] = json::array();
  for (const FiniteMdp& m : prior.candidates) {
    json transitions = json::array();
    for (StateId s = 0; s < m.n_states; ++s) {
      json row = json::array();
      for (size_t slot = 0; slot < m.applicable[s].size(); ++slot) {
        json outs = json::array();
        for (const auto& o : m.table[s][slot])
          outs.push_back(json{{"next", o.next}, {"prob", o.prob}, {"reward", reward_to_json(o.reward)}});
        row.push_back(std::move(outs));
      }
      transitions.push_back(std::move(row));
    }
    doc["candidates"].push_back(json{{"transitions", std::move(transitions)}});
  }

  json ann;
  if (!env.annotations.phi_table.empty()) ann["phi_table"] = env.annotations.phi_table;
  if (!env.annotations.subgoals.empty()) ann["subgoals"] = env.annotations.subgoals;
  if (!env.annotations.tv_states.empty()) ann["tv_states"] = env.annotations.tv_states;
  if (env.annotations.goal_state) ann["goal_state"] = *env.annotations.goal_state;
  if (env.annotations.episode_length) ann["episode_length"] = *env.annotations.episode_length;
  if (!ann.is_null()) doc["annotations"] = std::move(ann);

  return doc.dump(2) + "\n";
}

Environment load_env_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw validation_error(std::string("spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw validation_error("spec root must be an object");
  const int version = get_path<int>(doc, "schema_version", "spec");
  if (version != 1)
    throw validation_error("spec.schema_version: unsupported version " + std::to_string(version));

  auto states = get_path<std::vector<std::string>>(doc, "states", "spec");
  auto actions = get_path<std::vector<std::string>>(doc, "actions", "spec");
  auto applicable = get_path<std::vector<std::vector<ActionId>>>(doc, "applicable", "spec");
  auto initial = get_path<std::vector<double>>(doc, "initial_dist", "spec");
  auto weights = get_path<std::vector<double>>(doc, "weights", "spec");
  const double discount = get_path<double>(doc, "discount", "spec");
  const json& candidates = at_path(doc, "candidates", "spec");
  if (!candidates.is_array() || candidates.empty())
    throw validation_error("spec.candidates: must be a non-empty array");
  if (applicable.size() != states.size())
    throw validation_error("spec.applicable: expected one row per state");

  Environment env;
  env.prior.name = doc.value("name", "");
  env.prior.weights = std::move(weights);
  for (size_t ci = 0; ci < candidates.size(); ++ci) {
    const std::string cpath = "spec.candidates[" + std::to_string(ci) + "]";
    FiniteMdp m;
    m.n_states = static_cast<int>(states.size());
    m.n_actions = static_cast<int>(actions.size());
    m.state_names = states;
    m.action_names = actions;
    m.applicable = applicable;
    m.initial_dist = initial;
    m.discount = discount;
    const json& transitions = at_path(candidates[ci], "transitions", cpath);
    if (!transitions.is_array() || transitions.size() != states.size())
      throw validation_error(cpath + ".transitions: expected one row per state");
    m.table.resize(m.n_states);
    for (StateId s = 0; s < m.n_states; ++s) {
      const std::string spath = cpath + ".transitions[" + std::to_string(s) + "]";
      const json& row = transitions[s];
      if (!row.is_array() || row.size() != m.applicable[s].size())
        throw validation_error(spath + ": expected one outcome list per applicable action");
      m.table[s].resize(row.size());
      for (size_t slot = 0; slot < row.size(); ++slot) {
        const std::string opath = spath + "[" + std::to_string(slot) + "]";
        if (!row[slot].is_array()) throw validation_error(opath + ": expected an outcome array");
        for (size_t oi = 0; oi < row[slot].size(); ++oi) {
          const std::string epath = opath + "[" + std::to_string(oi) + "]";
          const json& o = row[slot][oi];
          FiniteMdp::Outcome out;
          out.next = get_path<StateId>(o, "next", epath);
          out.prob = get_path<double>(o, "prob", epath);
          const json& rj = at_path(o, "reward", epath);
          try {
            out.reward = RewardDist(rj.at("values").get<std::vector<double>>(),
                                    rj.at("probs").get<std::vector<double>>());
          } catch (const json::exception& e) {
            throw validation_error(epath + ".reward: " + e.what());
          } catch (const std::exception& e) {
            throw validation_error(epath + ".reward: " + e.what());
          }
          m.table[s][slot].push_back(std::move(out));
        }
      }
    }
    try {
      m.validate();
    } catch (const std::exception& e) {
      throw validation_error(cpath + ": " + e.what());
    }
    env.prior.candidates.push_back(std::move(m));
  }
  try {
    env.prior.validate();
  } catch (const std::exception& e) {
    throw validation_error(std::string("spec: ") + e.what());
  }

  if (auto it = doc.find("annotations"); it != doc.end() && !it->is_null()) {
    const json& ann = *it;
    env.annotations.phi_table = ann.value("phi_table", std::vector<double>{});
    env.annotations.subgoals = ann.value("subgoals", std::vector<int>{});
    env.annotations.tv_states = ann.value("tv_states", std::vector<StateId>{});
    if (ann.contains("goal_state")) env.annotations.goal_state = ann["goal_state"].get<StateId>();
    if (ann.contains("episode_length"))
      env.annotations.episode_length = ann["episode_length"].get<int>();
  }
  return env;
}

PriorMixture gen_random_bamdp(std::uint64_t seed, const RandomBamdpParams& p) {
  if (p.n_states < 1 || p.n_states > 8 || p.n_actions < 1 || p.n_actions > 4 ||
      p.n_candidates < 1 || p.n_candidates > 4)
    throw argument_error("random instance sizes are capped at 8 states / 4 actions / 4 candidates");
  if (p.reward_levels < 1 || !(p.discount > 0.0 && p.discount < 1.0))
    throw argument_error("need reward_levels >= 1 and discount in (0,1)");

  std::mt19937_64 eng(seed);
  auto pick = [&](int n) { return static_cast<int>(eng() % static_cast<std::uint64_t>(n)); };
  auto unit = [&](void) { return (eng() >> 11) * 0x1.0p-53; };
  auto grid_reward = [&](void) {
    return (pick(p.reward_levels) - p.reward_levels / 2) * p.reward_scale;
  };

  // One shared transition skeleton; candidates differ only in their
  // deterministic grid rewards, so observations cut the belief support
  // instead of producing arbitrary posterior ratios.
  FiniteMdp skeleton = FiniteMdp::shell(p.n_states, p.n_actions, p.discount);
  skeleton.initial_dist.assign(p.n_states, 0.0);
  skeleton.initial_dist[0] = 1.0;
  for (StateId s = 0; s < p.n_states; ++s)
    for (ActionId a = 0; a < p.n_actions; ++a) {
      StateId first = pick(p.n_states);
      if (p.n_states > 1 && unit() < p.branch_prob) {
        StateId second = pick(p.n_states - 1);
        if (second >= first) ++second;
        const double q = pick(2) == 0 ? 0.5 : 0.25;
        skeleton.table[s][a].push_back({std::min(first, second), q, RewardDist::point(0.0)});
        skeleton.table[s][a].push_back({std::max(first, second), 1.0 - q, RewardDist::point(0.0)});
      } else {
        skeleton.table[s][a].push_back({first, 1.0, RewardDist::point(0.0)});
      }
    }

  PriorMixture prior;
  prior.name = "random_" + std::to_string(seed);
  for (int c = 0; c < p.n_candidates; ++c) {
    FiniteMdp m = skeleton;
    for (StateId s = 0; s < p.n_states; ++s)
      for (ActionId a = 0; a < p.n_actions; ++a)
        for (auto& o : m.table[s][a]) o.reward = RewardDist::point(grid_reward());
    prior.candidates.push_back(std::move(m));
  }
  std::vector<double> raw(p.n_candidates);
  double total = 0.0;
  for (double& w : raw) total += (w = 1.0 + pick(4));
  prior.weights.resize(p.n_candidates);
  for (int c = 0; c < p.n_candidates; ++c) prior.weights[c] = raw[c] / total;
  prior.validate();
  return prior;
}

}  // namespace bampf
