#include "bampf/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bampf/agents.hpp"
#include "bampf/certify.hpp"
#include "bampf/envs.hpp"
#include "bampf/errors.hpp"
#include "bampf/eval.hpp"
#include "bampf/json_io.hpp"
#include "bampf/planner.hpp"
#include "bampf/shaping.hpp"

namespace bampf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string env_name;
  std::string spec_path;
  std::string agent_spec = "bayes";
  std::string shaping_name;
  double scale = 1.0;
  double gamma_override = -1.0;
  int horizon = 0;  // 0 = derived from the discount tail
  std::string seeds_spec = "0";
  int jobs = 1;
  std::string out_dir;
  double tol = -1.0;  // per-subcommand default when negative
  int depth = -1;     // per-subcommand default when negative
  std::string which = "all";
  std::string target;
  std::string k_list = "1,3,5,10";
  double d_resolution = 0.01;
  int gen_states = 4;
  int gen_actions = 2;
  int gen_candidates = 3;
};

double tol_or(const Options& o, double fallback) { return o.tol < 0.0 ? fallback : o.tol; }
int depth_or(const Options& o, int fallback) { return o.depth < 0 ? fallback : o.depth; }

void emit_error(std::ostream& err, const std::string& type, const std::string& message) {
  err << json{{"schema_version", 1}, {"error", {{"type", type}, {"message", message}}}}.dump()
      << '\n';
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.push_back("");
  return parts;
}

std::uint64_t parse_u64(const std::string& text) {
  size_t idx = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &idx);
  } catch (const std::exception&) {
    throw argument_error("not an unsigned integer: '" + text + "'");
  }
  if (idx != text.size()) throw argument_error("not an unsigned integer: '" + text + "'");
  return v;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : split(spec, ',')) {
    if (item.empty()) throw argument_error("empty entry in seed list '" + spec + "'");
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(parse_u64(item));
      continue;
    }
    const std::uint64_t lo = parse_u64(item.substr(0, dots));
    const std::uint64_t hi = parse_u64(item.substr(dots + 2));
    if (hi < lo) throw argument_error("descending seed range '" + item + "'");
    if (hi - lo >= 1'000'000) throw argument_error("seed range '" + item + "' is too large");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw argument_error("no seeds given");
  return seeds;
}

std::vector<int> parse_k_list(const std::string& spec) {
  std::vector<int> ks;
  for (const std::string& item : split(spec, ',')) {
    if (item.empty()) throw argument_error("empty entry in k list '" + spec + "'");
    const std::uint64_t v = parse_u64(item);
    if (v > 10'000) throw argument_error("k value " + item + " is too large");
    ks.push_back(static_cast<int>(v));
  }
  return ks;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw argument_error("cannot read file " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw argument_error("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw argument_error("failed writing " + path.string());
}

Environment load_environment(const Options& o, std::string* spec_text) {
  if (!o.env_name.empty() && !o.spec_path.empty())
    throw argument_error("--env and --spec are mutually exclusive");
  if (o.env_name.empty() && o.spec_path.empty())
    throw argument_error("one of --env or --spec is required");
  if (!o.env_name.empty()) {
    BenchmarkParams p;
    p.discount = o.gamma_override;  // negative keeps the benchmark default
    return make_benchmark(o.env_name, p);
  }
  const std::string text = read_text_file(o.spec_path);
  if (spec_text) *spec_text = text;
  Environment env = load_env_spec(text);
  if (o.gamma_override >= 0.0) {
    for (auto& c : env.prior.candidates) c.discount = o.gamma_override;
    env.prior.validate();
  }
  return env;
}

std::shared_ptr<const PseudoReward> build_shaping(const Environment& env, const Options& o) {
  if (o.shaping_name.empty()) return nullptr;
  BuiltinParams p;
  p.scale = o.scale;
  p.phi_table = env.annotations.phi_table;
  p.subgoals = env.annotations.subgoals;
  if (env.annotations.episode_length && *env.annotations.episode_length > 0)
    p.state_modulo = env.prior.n_states() / *env.annotations.episode_length;
  return std::make_shared<PseudoReward>(make_builtin(o.shaping_name, env.prior, p));
}

PlannerConfig planner_config(const Environment& env, const Options& o, const PseudoReward* f) {
  PlannerConfig cfg = PlannerConfig::for_prior(env.prior);
  if (o.horizon > 0) cfg.horizon = o.horizon;
  cfg.tie_tol = tol_or(o, 1e-6);
  if (f != nullptr && f->claimed_potential) cfg.phi_max = f->claimed_potential->phi_max;
  return cfg;
}

int parse_small_int(const std::string& text, const char* what) {
  const std::uint64_t v = parse_u64(text);
  if (v > 1'000'000) throw argument_error(std::string(what) + " value " + text + " is too large");
  return static_cast<int>(v);
}

double parse_real(const std::string& text, const char* what) {
  size_t idx = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &idx);
  } catch (const std::exception&) {
    throw argument_error(std::string("bad ") + what + ": '" + text + "'");
  }
  if (idx != text.size()) throw argument_error(std::string("bad ") + what + ": '" + text + "'");
  return v;
}

InterpMode interp_mode_of(const std::string& name) {
  if (name == "exact") return InterpMode::exact_posterior;
  if (name == "mean") return InterpMode::mean_model;
  if (name == "map") return InterpMode::map_model;
  throw argument_error("unknown belief interpretation '" + name + "' (exact|mean|map)");
}

Agent build_agent(const std::string& spec, const PlannerConfig& pcfg,
                  const PseudoReward* objective) {
  const std::vector<std::string> parts = split(spec, ':');
  const std::string& kind = parts.empty() ? spec : parts[0];
  auto need = [&](size_t i, const char* what) -> const std::string& {
    if (parts.size() <= i)
      throw argument_error("agent spec '" + spec + "' is missing its " + what);
    return parts[i];
  };
  if (kind == "bayes") return make_bayes_optimal_agent(pcfg, objective);
  if (kind == "ce_exact") return make_ce_agent(InterpMode::exact_posterior, {}, objective);
  if (kind == "ce_mean") return make_ce_agent(InterpMode::mean_model, {}, objective);
  if (kind == "ce_map") return make_ce_agent(InterpMode::map_model, {}, objective);
  if (kind == "kstep") return make_kstep_agent(parse_small_int(need(1, "k"), "k"), objective);
  if (kind == "epsgreedy") {
    const double eps = parse_real(need(1, "epsilon"), "epsilon");
    // The base is everything after the second colon, so it can carry its own
    // arguments (epsgreedy:0.1:kstep:4).
    std::string base_spec = "ce_exact";
    if (parts.size() > 2) {
      base_spec = parts[2];
      for (size_t i = 3; i < parts.size(); ++i) base_spec += ":" + parts[i];
    }
    Agent base = build_agent(base_spec, pcfg, objective);
    return make_epsilon_greedy_agent(std::move(base), eps);
  }
  if (kind == "boltzmann") {
    const double temp = parse_real(need(1, "temperature"), "temperature");
    const InterpMode mode =
        parts.size() > 2 ? interp_mode_of(parts[2]) : InterpMode::exact_posterior;
    return make_boltzmann_agent(mode, temp);
  }
  throw argument_error("unknown agent spec '" + spec +
                       "' (bayes | ce_exact | ce_mean | ce_map | kstep:K | "
                       "epsgreedy:EPS[:BASE] | boltzmann:TEMP[:MODE])");
}

json make_config(const std::string& subcommand, const Options& o, const std::string& spec_text,
                 const std::vector<std::uint64_t>* seeds, json extra) {
  json c{{"subcommand", subcommand}};
  if (!o.env_name.empty()) c["env"] = o.env_name;
  if (!o.spec_path.empty()) c["spec_hash"] = config_hash(json(spec_text));
  if (o.gamma_override >= 0.0) c["gamma_override"] = o.gamma_override;
  if (!o.shaping_name.empty()) {
    c["shaping"] = o.shaping_name;
    c["scale"] = o.scale;
  }
  if (o.horizon > 0) c["horizon"] = o.horizon;
  if (seeds != nullptr) c["seeds"] = *seeds;
  for (auto& [k, v] : extra.items()) c[k] = std::move(v);
  return c;
}

fs::path prepare_out(const Options& o, const json& config) {
  fs::path dir = o.out_dir.empty() ? fs::path() : fs::path(o.out_dir);
  if (dir.empty()) {
    if (const char* root = std::getenv("BAMPF_LAB_OUT"); root != nullptr && *root != '\0')
      dir = root;
    else
      dir = "out";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw argument_error("cannot create output directory " + dir.string());
  write_file(dir / "config.json", render_json_report(config, config));
  return dir;
}

double action_value_of(const PlanResult& r, ActionId a) {
  for (const auto& [act, q] : r.action_values)
    if (act == a) return q;
  throw argument_error("action " + std::to_string(a) + " is not applicable here");
}

std::string belief_cell(const Belief& b) {
  std::string out;
  for (size_t i = 0; i < b.w.size(); ++i) {
    if (i != 0) out += ';';
    out += format_double(b.w[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

int cmd_plan(const Options& o, std::ostream& out) {
  std::string spec_text;
  Environment env = load_environment(o, &spec_text);
  auto f = build_shaping(env, o);
  PlannerConfig cfg = planner_config(env, o, f.get());
  json config = make_config("plan", o, spec_text, nullptr, {{"tol", cfg.tie_tol}});

  json roots = json::array();
  double expected = 0.0, expected_bound = 0.0;
  const auto& init = env.prior.initial_dist();
  for (StateId s = 0; s < env.prior.n_states(); ++s) {
    if (init[s] <= 0.0) continue;
    AugmentedState aug = initial_augmented_state(env.prior, s, f.get());
    PlanResult r = plan_bayes_optimal(env.prior, aug, f.get(), cfg);
    expected += init[s] * r.value;
    expected_bound += init[s] * r.error_bound;
    json labels = json::array();
    for (ActionId a : r.optimal_action_set) labels.push_back(env.prior.action_label(a));
    roots.push_back(json{{"state", s},
                         {"state_label", env.prior.state_label(s)},
                         {"prob", init[s]},
                         {"plan", r},
                         {"optimal_action_labels", std::move(labels)}});
  }
  json body{{"command", "plan"},          {"environment", env.prior.name},
            {"shaping", f ? f->name : ""}, {"horizon", cfg.horizon},
            {"initial_states", roots},     {"expected_value", expected},
            {"error_bound", expected_bound}};
  const std::string report = render_json_report(std::move(body), config);
  const fs::path dir = prepare_out(o, config);
  write_file(dir / "plan.json", report);
  out << report;
  return 0;
}

int cmd_rollout(const Options& o, std::ostream& out) {
  std::string spec_text;
  Environment env = load_environment(o, &spec_text);
  auto f = build_shaping(env, o);
  PlannerConfig cfg = planner_config(env, o, f.get());
  const std::vector<std::uint64_t> seeds = parse_seeds(o.seeds_spec);
  json config = make_config("rollout", o, spec_text, &seeds,
                            {{"agent", o.agent_spec}, {"tol", cfg.tie_tol}});

  Agent agent = build_agent(o.agent_spec, cfg, f.get());
  const std::vector<Trace> traces =
      rollout(env.prior, agent, f.get(), cfg.horizon, seeds, o.jobs);

  double mean_g = 0.0, mean_gs = 0.0;
  for (const Trace& t : traces) {
    mean_g += t.g;
    mean_gs += t.g_shaped;
  }
  mean_g /= static_cast<double>(traces.size());
  mean_gs /= static_cast<double>(traces.size());

  json body{{"command", "rollout"},
            {"environment", env.prior.name},
            {"agent", agent.name},
            {"shaping", f ? f->name : ""},
            {"horizon", cfg.horizon},
            {"seeds", seeds.size()},
            {"mean_return", mean_g},
            {"mean_shaped_return", mean_gs},
            {"tail_bound", traces.front().tail_bound}};
  const std::string report = render_json_report(std::move(body), config);
  const fs::path dir = prepare_out(o, config);
  write_file(dir / "traces.csv", trace_csv(traces, env.prior.discount(), config));
  write_file(dir / "rollout.json", report);
  out << report;
  return 0;
}

int cmd_decompose(const Options& o, std::ostream& out) {
  std::string spec_text;
  Environment env = load_environment(o, &spec_text);
  PlannerConfig cfg = planner_config(env, o, nullptr);
  const int depth = depth_or(o, 2);
  json config = make_config("decompose", o, spec_text, nullptr,
                            {{"depth", depth}, {"tol", cfg.tie_tol}});

  // Breadth-first over reachable augmented states, deduplicated on
  // (state, posterior); all statistics are empty in the unshaped problem.
  std::vector<AugmentedState> frontier;
  std::vector<std::string> seen;
  auto try_add = [&](const AugmentedState& aug) {
    std::string key = std::to_string(aug.s) + '|' + json(aug.belief.w).dump();
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) return;
    seen.push_back(std::move(key));
    frontier.push_back(aug);
  };
  const auto& init = env.prior.initial_dist();
  for (StateId s = 0; s < env.prior.n_states(); ++s)
    if (init[s] > 0.0) try_add(initial_augmented_state(env.prior, s, nullptr));
  for (size_t i = 0; i < frontier.size(); ++i) {
    const AugmentedState aug = frontier[i];  // copy: try_add may reallocate
    if (aug.depth >= depth) continue;
    for (ActionId a : env.prior.applicable(aug.s))
      for (const Successor& sc : successor_distribution(env.prior, aug, a, nullptr))
        try_add(sc.aug);
  }

  std::ostringstream csv;
  csv << csv_stamp(config)
      << "depth,state,belief,total,voo,voi,total_bound,voo_bound,voi_bound,negative_voi\n";
  int negatives = 0;
  for (const AugmentedState& aug : frontier) {
    const Decomposition dec = decompose_value(env.prior, aug, cfg);
    negatives += dec.negative_voi ? 1 : 0;
    csv << aug.depth << ',' << aug.s << ',' << belief_cell(aug.belief) << ','
        << format_double(dec.total) << ',' << format_double(dec.voo) << ','
        << format_double(dec.voi) << ',' << format_double(dec.total_bound) << ','
        << format_double(dec.voo_bound) << ',' << format_double(dec.voi_bound) << ','
        << (dec.negative_voi ? 1 : 0) << '\n';
  }
  const fs::path dir = prepare_out(o, config);
  write_file(dir / "decompose.csv", csv.str());
  const std::string report = render_json_report(
      json{{"command", "decompose"},
           {"environment", env.prior.name},
           {"states", frontier.size()},
           {"negative_voi_states", negatives}},
      config);
  write_file(dir / "decompose.json", report);
  out << csv.str();
  return 0;
}

int cmd_check_bampf(const Options& o, std::ostream& out, std::ostream& err) {
  std::string spec_text;
  Environment env = load_environment(o, &spec_text);
  auto f = build_shaping(env, o);
  if (!f) throw argument_error("check-bampf requires --shaping");
  const int depth = depth_or(o, 3);
  const double tol = tol_or(o, 1e-9);
  json config =
      make_config("check-bampf", o, spec_text, nullptr, {{"depth", depth}, {"tol", tol}});

  const BampfCertificate cert = check_bampf(*f, env.prior, depth, tol);
  json body = cert;
  body["command"] = "check-bampf";
  body["shaping"] = f->name;
  const std::string report = render_json_report(std::move(body), config);
  const fs::path dir = prepare_out(o, config);
  write_file(dir / "certificate.json", report);
  out << report;
  if (cert.verdict == BampfCertificate::Verdict::certified_bampf) return 0;
  emit_error(err, "verification",
             cert.verdict == BampfCertificate::Verdict::witness_found
                 ? "pseudo-reward '" + f->name + "' is not potential-based: witness found"
                 : "certificate inconclusive within the node budget");
  return 2;
}

int cmd_counterexample(const Options& o, std::ostream& out, std::ostream& err) {
  std::string spec_text;
  Environment env = load_environment(o, &spec_text);
  auto f = build_shaping(env, o);
  if (!f) throw argument_error("counterexample requires --shaping");
  const int depth = depth_or(o, 3);
  const double tol = tol_or(o, 1e-9);
  json config =
      make_config("counterexample", o, spec_text, nullptr, {{"depth", depth}, {"tol", tol}});

  const BampfCertificate cert = check_bampf(*f, env.prior, depth, tol);
  if (cert.verdict != BampfCertificate::Verdict::witness_found) {
    prepare_out(o, config);
    emit_error(err, "verification",
               "no witness found for '" + f->name + "' at depth " + std::to_string(depth) +
                   "; nothing to build");
    return 2;
  }

  const Counterexample cx =
      build_necessity_counterexample(*cert.witness, env.prior.discount(), tol);
  PlannerConfig cfg = PlannerConfig::for_prior(cx.instance);
  const AugmentedState u0 = initial_augmented_state(cx.instance, 0, nullptr);
  const AugmentedState s0 = initial_augmented_state(cx.instance, 0, &cx.shaping);
  const PlanResult pu = plan_bayes_optimal(cx.instance, u0, nullptr, cfg);
  const PlanResult ps = plan_bayes_optimal(cx.instance, s0, &cx.shaping, cfg);
  const bool confirmed =
      pu.optimal_action_set == std::vector<ActionId>{cx.predicted_unshaped} &&
      ps.optimal_action_set == std::vector<ActionId>{cx.predicted_shaped};
  const double q_gap =
      action_value_of(pu, cx.action_a) - action_value_of(pu, cx.action_a_prime);

  json body{{"command", "counterexample"},
            {"shaping", f->name},
            {"delta", cx.delta},
            {"r_prime", cx.r_prime},
            {"action_a", cx.action_a},
            {"action_a_prime", cx.action_a_prime},
            {"predicted_unshaped", cx.predicted_unshaped},
            {"predicted_shaped", cx.predicted_shaped},
            {"unshaped_plan", pu},
            {"shaped_plan", ps},
            {"unshaped_q_gap", q_gap},
            {"witness", *cert.witness},
            {"confirmed", confirmed}};
  const std::string report = render_json_report(std::move(body), config);
  const fs::path dir = prepare_out(o, config);
  json instance_doc = json::parse(save_env_spec(Environment{cx.instance, {}}));
  instance_doc["config_hash"] = config_hash(config);
  write_file(dir / "counterexample_instance.json", instance_doc.dump(2) + "\n");
  write_file(dir / "counterexample.json", report);
  out << report;
  if (confirmed) return 0;
  emit_error(err, "verification", "planner did not confirm the predicted disagreement");
  return 2;
}

int cmd_bounds(const Options& o, std::ostream& out, std::ostream& err) {
  std::string spec_text;
  Environment env = load_environment(o, &spec_text);
  auto f = build_shaping(env, o);
  if (!f) throw argument_error("bounds requires --shaping");
  if (!f->claimed_potential)
    throw argument_error("bounds requires a potential-backed pseudo-reward; '" + f->name +
                         "' does not carry one");
  const Potential& pot = *f->claimed_potential;
  const std::vector<int> ks = parse_k_list(o.k_list);
  PlannerConfig cfg = planner_config(env, o, f.get());
  json config = make_config("bounds", o, spec_text, nullptr,
                            {{"which", o.which},
                             {"k", o.k_list},
                             {"d", o.d_resolution},
                             {"tol", cfg.tie_tol}});

  const bool all = o.which == "all";
  std::vector<BoundReport> reports;
  if (all || o.which == "cor2")
    for (const char* spec : {"ce_exact", "ce_map", "kstep:3"})
      reports.push_back(
          verify_bound_cor2(env.prior, pot, build_agent(spec, cfg, nullptr), cfg.horizon, cfg));
  if (all || o.which == "kstep")
    for (int k : ks) reports.push_back(verify_bound_kstep(env.prior, pot, k, cfg));
  if (all || o.which == "cor3")
    for (int k : ks) reports.push_back(verify_bound_cor3(env.prior, pot, k, cfg.horizon, cfg));
  if (all || o.which == "d_horizon")
    reports.push_back(verify_d_horizon(pot.phi_max, o.d_resolution, env.prior.discount()));

  bool ok = true;
  std::string failures;
  for (const BoundReport& r : reports)
    if (!r.satisfied) {
      ok = false;
      failures += (failures.empty() ? "" : ", ") + r.name + " k=" + std::to_string(r.k);
    }
  json body{{"command", "bounds"},
            {"environment", env.prior.name},
            {"shaping", f->name},
            {"reports", reports},
            {"all_satisfied", ok}};
  const std::string report = render_json_report(std::move(body), config);
  const fs::path dir = prepare_out(o, config);
  write_file(dir / "bounds.json", report);
  out << report;
  if (ok) return 0;
  emit_error(err, "verification", "bound checks failed: " + failures);
  return 2;
}

int reproduce_caterpillar(const Options& o, std::ostream& out) {
  Environment env = make_benchmark("caterpillar");
  const PriorMixture& prior = env.prior;
  PlannerConfig cfg = planner_config(env, o, nullptr);
  json config = make_config("reproduce", o, "", nullptr, {{"target", "caterpillar"}});

  const AugmentedState start = initial_augmented_state(prior, 0, nullptr);
  const PlanResult root = plan_bayes_optimal(prior, start, nullptr, cfg);
  AugmentedState bush = start;
  bush.s = 1;  // at the bush, belief still the prior
  const PlanResult bush_plan = plan_bayes_optimal(prior, bush, nullptr, cfg);

  const Belief prior_b = Belief::from_prior(prior);
  const FiniteMdp& shape = prior.candidates[0];
  auto pol = [&](ActionId at_weed, ActionId at_bush) {
    return StationaryPolicy::deterministic(shape, {at_weed, at_bush});
  };
  const InterpMode exact = InterpMode::exact_posterior;
  const CeChoice choice = ce_act(prior, start, exact);
  Agent ce = make_ce_agent(exact);
  const RegretReport rr = bayesian_regret(prior, ce, cfg.horizon, cfg, RegretMethod::both);

  const std::vector<std::pair<std::string, double>> rows = {
      {"bayes_q_go", action_value_of(root, 1)},
      {"bayes_q_stay", action_value_of(root, 0)},
      {"bayes_q_gap", action_value_of(root, 1) - action_value_of(root, 0)},
      {"bayes_value_start", root.value},
      {"bayes_optimal_action", static_cast<double>(root.optimal_action_set.front())},
      {"bayes_value_bush_prior", bush_plan.value},
      {"planner_error_bound", root.error_bound},
      {"ce_value_weed_stay_stay", ce_policy_value(prior, prior_b, exact, pol(0, 0), 0)},
      {"ce_value_weed_go_stay", ce_policy_value(prior, prior_b, exact, pol(1, 0), 0)},
      {"ce_value_weed_go_go", ce_policy_value(prior, prior_b, exact, pol(1, 1), 0)},
      {"ce_value_bush_stay_go", ce_policy_value(prior, prior_b, exact, pol(0, 1), 1)},
      {"ce_value_bush_stay_stay", ce_policy_value(prior, prior_b, exact, pol(0, 0), 1)},
      {"ce_initial_action", static_cast<double>(choice.action)},
      {"ce_q_bush_stay", ce_q_estimate(prior, prior_b, exact, 1, 0)},
      {"regret_direct", rr.direct},
      {"regret_pdl", rr.pdl},
      {"regret_per_step", rr.per_step},
      {"regret_direct_bound", rr.direct_bound},
      {"regret_pdl_bound", rr.pdl_bound},
  };
  const std::string table = kv_table_csv(rows, config);
  const fs::path dir = prepare_out(o, config);
  write_file(dir / "caterpillar.csv", table);
  json body{{"command", "reproduce"}, {"target", "caterpillar"}};
  for (const auto& [name, value] : rows) body[name] = value;
  write_file(dir / "caterpillar.json", render_json_report(std::move(body), config));
  out << table;
  return 0;
}

int reproduce_fig1(const Options& o, std::ostream& out) {
  json config = make_config("reproduce", o, "", nullptr, {{"target", "fig1"}});
  Environment grid = make_benchmark("goal_grid");  // 5x5, goal far corner, 0.99
  const PriorMixture& prior = grid.prior;
  const int w = 5, h = 5, gx = 4, gy = 4;
  const Belief b = Belief::from_prior(prior);

  // Potential-based shaping on the goal-distance potential: value of the
  // one-step-closer move from every non-goal cell.
  BuiltinParams pp;
  pp.phi_table = grid.annotations.phi_table;
  const PseudoReward pbsf = make_builtin("state_potential_pbsf", prior, pp);
  std::vector<HeatmapCell> cells_a;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const StateId s = y * w + x;
      if (x == gx && y == gy) {
        cells_a.push_back({x, y, 0.0});
        continue;
      }
      const int nx = x < gx ? x + 1 : x;
      const int ny = x < gx ? y : y + 1;
      const ActionId a = x < gx ? 3 : 1;  // right, else down
      const StateId next = ny * w + nx;
      const StatValue st0 = pbsf.statistic.initial(prior, s);
      StepContext ctx;
      ctx.prior = &prior;
      ctx.belief_before = &b;
      ctx.s = s;
      ctx.a = a;
      ctx.r = 0.0;
      ctx.s_next = next;
      ctx.belief_after = &b;
      const StatValue st1 = pbsf.statistic.update(st0, ctx);
      cells_a.push_back({x, y, pbsf.f(st0, ctx, st1)});
    }

  // Novelty shaping along a serpentine first sweep of the same grid: the
  // first-visit pseudo-reward at each cell, in visit order. The start cell
  // takes the formula's n = 0 extension (no transition lands on it).
  const PseudoReward uniq = make_builtin("unique_state_count", prior, {});
  std::vector<std::pair<int, int>> scan;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) scan.emplace_back(y % 2 == 0 ? x : w - 1 - x, y);
  std::vector<HeatmapCell> cells_b;
  cells_b.push_back({0, 0, prior.discount()});
  StatValue st = uniq.statistic.initial(prior, 0);
  for (size_t i = 1; i < scan.size(); ++i) {
    const auto [px, py] = scan[i - 1];
    const auto [cx, cy] = scan[i];
    ActionId a = 1;  // down on row changes
    if (cy == py) a = cx > px ? 3 : 2;
    StepContext ctx;
    ctx.prior = &prior;
    ctx.belief_before = &b;
    ctx.s = py * w + px;
    ctx.a = a;
    ctx.r = 0.0;
    ctx.s_next = cy * w + cx;
    ctx.belief_after = &b;
    const StatValue st1 = uniq.statistic.update(st, ctx);
    cells_b.push_back({cx, cy, uniq.f(st, ctx, st1)});
    st = st1;
  }
  std::sort(cells_b.begin(), cells_b.end(), [&](const HeatmapCell& l, const HeatmapCell& r) {
    return l.y != r.y ? l.y < r.y : l.x < r.x;
  });

  const fs::path dir = prepare_out(o, config);
  write_file(dir / "fig1a.csv", heatmap_csv(cells_a, config));
  write_file(dir / "fig1b.csv", heatmap_csv(cells_b, config));
  const std::string report = render_json_report(
      json{{"command", "reproduce"}, {"target", "fig1"}, {"files", {"fig1a.csv", "fig1b.csv"}}},
      config);
  write_file(dir / "fig1.json", report);
  out << report;
  return 0;
}

int reproduce_noisytv(const Options& o, std::ostream& out) {
  json config = make_config("reproduce", o, "", nullptr, {{"target", "noisytv"}, {"scale", o.scale}});
  Environment env = make_benchmark("noisy_tv");  // corridor 4, 8 channels, 0.9
  const PriorMixture& prior = env.prior;
  BuiltinParams pp;
  pp.scale = o.scale;
  const PseudoReward pe = make_builtin("prediction_error", prior, pp);
  const PseudoReward ig = make_builtin("information_gain", prior, pp);
  PlannerConfig cfg = planner_config(env, o, nullptr);
  PlannerConfig cfg_ig = planner_config(env, o, &ig);

  json states = json::array();
  bool ig_matches = true;
  std::vector<PlanResult> plain(prior.n_states());
  std::vector<PlanResult> shaped_pe(prior.n_states());
  for (StateId s = 0; s < prior.n_states(); ++s) {
    plain[s] = plan_bayes_optimal(prior, initial_augmented_state(prior, s, nullptr), nullptr, cfg);
    shaped_pe[s] =
        plan_bayes_optimal(prior, initial_augmented_state(prior, s, &pe), &pe, cfg);
    const PlanResult pig =
        plan_bayes_optimal(prior, initial_augmented_state(prior, s, &ig), &ig, cfg_ig);
    ig_matches = ig_matches && pig.optimal_action_set == plain[s].optimal_action_set;
    states.push_back(json{{"state", s},
                          {"state_label", prior.state_label(s)},
                          {"unshaped", plain[s]},
                          {"prediction_error", shaped_pe[s]},
                          {"information_gain", pig}});
  }
  const StateId tv = env.annotations.tv_states.front();
  const std::vector<std::pair<std::string, double>> rows = {
      {"tv_state", static_cast<double>(tv)},
      {"unshaped_action_tv", static_cast<double>(plain[tv].optimal_action_set.front())},
      {"unshaped_value_tv", plain[tv].value},
      {"pe_action_tv", static_cast<double>(shaped_pe[tv].optimal_action_set.front())},
      {"pe_value_tv", shaped_pe[tv].value},
      {"pe_q_tv_stay", action_value_of(shaped_pe[tv], 0)},
      {"pe_q_tv_right", action_value_of(shaped_pe[tv], 2)},
      {"ig_matches_unshaped", ig_matches ? 1.0 : 0.0},
  };
  const std::string table = kv_table_csv(rows, config);
  const fs::path dir = prepare_out(o, config);
  write_file(dir / "noisytv.csv", table);
  json body{{"command", "reproduce"}, {"target", "noisytv"}, {"states", std::move(states)}};
  for (const auto& [name, value] : rows) body[name] = value;
  write_file(dir / "noisytv.json", render_json_report(std::move(body), config));
  out << table;
  return 0;
}

int cmd_gen_random(const Options& o, std::ostream& out) {
  const std::vector<std::uint64_t> seeds = parse_seeds(o.seeds_spec);
  RandomBamdpParams p;
  p.n_states = o.gen_states;
  p.n_actions = o.gen_actions;
  p.n_candidates = o.gen_candidates;
  json config = make_config("gen-random", o, "", &seeds,
                            {{"states", p.n_states},
                             {"actions", p.n_actions},
                             {"candidates", p.n_candidates}});
  const fs::path dir = prepare_out(o, config);
  json files = json::array();
  for (std::uint64_t seed : seeds) {
    const PriorMixture prior = gen_random_bamdp(seed, p);
    json doc = json::parse(save_env_spec(Environment{prior, {}}));
    doc["config_hash"] = config_hash(config);
    const std::string name = "random_" + std::to_string(seed) + ".json";
    write_file(dir / name, doc.dump(2) + "\n");
    files.push_back(name);
  }
  const std::string report = render_json_report(
      json{{"command", "gen-random"}, {"files", std::move(files)}}, config);
  write_file(dir / "gen_random.json", report);
  out << report;
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"bampf-lab: plan, simulate and verify tabular Bayes-adaptive MDPs"};
  app.require_subcommand(1);

  auto add_env = [&](CLI::App* c) {
    c->add_option("--env", o.env_name, "built-in benchmark name");
    c->add_option("--spec", o.spec_path, "environment spec file (JSON)");
    c->add_option("--gamma-override", o.gamma_override, "override the discount factor");
  };
  auto add_shaping = [&](CLI::App* c) {
    c->add_option("--shaping,--builtin", o.shaping_name, "built-in pseudo-reward name");
    c->add_option("--scale", o.scale, "pseudo-reward scale (default 1)");
  };
  auto add_out = [&](CLI::App* c) {
    c->add_option("--out", o.out_dir, "output directory (default $BAMPF_LAB_OUT or ./out)");
  };

  CLI::App* plan = app.add_subcommand("plan", "Bayes-optimal plan at the initial belief");
  add_env(plan);
  add_shaping(plan);
  add_out(plan);
  plan->add_option("--horizon", o.horizon, "planning horizon in reward layers (0 = from tail)");
  plan->add_option("--tol", o.tol, "action tie tolerance (default 1e-6)");

  CLI::App* roll = app.add_subcommand("rollout", "simulate an agent and write trace CSVs");
  add_env(roll);
  add_shaping(roll);
  add_out(roll);
  roll->add_option("--agent", o.agent_spec,
                   "bayes | ce_exact | ce_mean | ce_map | kstep:K | epsgreedy:EPS[:BASE] | "
                   "boltzmann:TEMP[:MODE]");
  roll->add_option("--horizon", o.horizon, "episode length (0 = from tail)");
  roll->add_option("--seeds", o.seeds_spec, "seed list, e.g. 0..9 or 1,5,7");
  roll->add_option("--jobs", o.jobs, "worker threads (never changes output bytes)");
  roll->add_option("--tol", o.tol, "action tie tolerance (default 1e-6)");

  CLI::App* dec =
      app.add_subcommand("decompose", "value-of-information table over reachable beliefs");
  add_env(dec);
  add_out(dec);
  dec->add_option("--depth", o.depth, "enumeration depth (default 2)");
  dec->add_option("--horizon", o.horizon, "planning horizon (0 = from tail)");
  dec->add_option("--tol", o.tol, "action tie tolerance (default 1e-6)");

  CLI::App* chk = app.add_subcommand(
      "check-bampf", "certify a pseudo-reward as potential-based (exit 2 when it is not)");
  add_env(chk);
  add_shaping(chk);
  add_out(chk);
  chk->add_option("--depth", o.depth, "history depth to scan (default 3)");
  chk->add_option("--tol", o.tol, "residual tolerance (default 1e-9)");

  CLI::App* cex = app.add_subcommand(
      "counterexample", "build and planner-verify a disagreement instance from a witness");
  add_env(cex);
  add_shaping(cex);
  add_out(cex);
  cex->add_option("--depth", o.depth, "witness search depth (default 3)");
  cex->add_option("--tol", o.tol, "residual tolerance (default 1e-9)");

  CLI::App* bnd = app.add_subcommand("bounds", "verify regret bounds (exit 2 on violation)");
  add_env(bnd);
  add_shaping(bnd);
  add_out(bnd);
  bnd->add_option("which", o.which, "all | cor2 | cor3 | kstep | d_horizon")
      ->check(CLI::IsMember({"all", "cor2", "cor3", "kstep", "d_horizon"}));
  bnd->add_option("--k", o.k_list, "comma-separated k values (default 1,3,5,10)");
  bnd->add_option("--d", o.d_resolution, "resolution for the d-horizon bound (default 0.01)");
  bnd->add_option("--horizon", o.horizon, "evaluation horizon (0 = from tail)");
  bnd->add_option("--tol", o.tol, "action tie tolerance (default 1e-6)");

  CLI::App* rep = app.add_subcommand("reproduce", "regenerate worked-example artifacts");
  rep->add_option("target", o.target, "caterpillar | fig1 | noisytv")
      ->required()
      ->check(CLI::IsMember({"caterpillar", "fig1", "noisytv"}));
  add_out(rep);
  rep->add_option("--scale", o.scale, "pseudo-reward scale (noisytv, default 1)");
  rep->add_option("--horizon", o.horizon, "planning horizon (0 = from tail)");

  CLI::App* gen = app.add_subcommand("gen-random", "write seeded random BAMDP spec files");
  add_out(gen);
  gen->add_option("--seeds", o.seeds_spec, "seed list, e.g. 0..99");
  gen->add_option("--states", o.gen_states, "states per instance (default 4, max 8)");
  gen->add_option("--actions", o.gen_actions, "actions per instance (default 2, max 4)");
  gen->add_option("--candidates", o.gen_candidates, "candidates per prior (default 3, max 4)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    emit_error(err, "usage", e.what());
    return 1;
  }

  try {
    if (plan->parsed()) return cmd_plan(o, out);
    if (roll->parsed()) return cmd_rollout(o, out);
    if (dec->parsed()) return cmd_decompose(o, out);
    if (chk->parsed()) return cmd_check_bampf(o, out, err);
    if (cex->parsed()) return cmd_counterexample(o, out, err);
    if (bnd->parsed()) return cmd_bounds(o, out, err);
    if (rep->parsed()) {
      if (o.target == "caterpillar") return reproduce_caterpillar(o, out);
      if (o.target == "fig1") return reproduce_fig1(o, out);
      return reproduce_noisytv(o, out);
    }
    if (gen->parsed()) return cmd_gen_random(o, out);
    emit_error(err, "usage", "no subcommand given");
    return 1;
  } catch (const argument_error& e) {
    emit_error(err, "validation", e.what());
    return 1;
  } catch (const validation_error& e) {
    emit_error(err, "validation", e.what());
    return 1;
  } catch (const impossible_evidence_error& e) {
    emit_error(err, "validation", e.what());
    return 1;
  } catch (const capacity_error& e) {
    emit_error(err, "capacity", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what());
    return 1;
  }
}

}  // namespace bampf
