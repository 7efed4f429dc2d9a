#include "bampf/json_io.hpp"

#include <cstdint>
#include <iomanip>
#include <sstream>

namespace bampf {

using nlohmann::json;

void to_json(json& j, const Belief& b) { j = b.w; }

void to_json(json& j, const History& h) {
  json steps = json::array();
  for (const auto& st : h.steps)
    steps.push_back(json{{"a", st.a}, {"r", st.r}, {"s", st.s}});
  j = json{{"s0", h.s0}, {"steps", std::move(steps)}};
}

void to_json(json& j, const PlanResult& r) {
  json q = json::array();
  for (const auto& [a, v] : r.action_values) q.push_back(json{{"action", a}, {"value", v}});
  j = json{{"value", r.value},
           {"action_values", std::move(q)},
           {"optimal_action_set", r.optimal_action_set},
           {"error_bound", r.error_bound},
           {"nodes", r.nodes}};
}

void to_json(json& j, const Decomposition& d) {
  j = json{{"total", d.total},           {"voo", d.voo},
           {"voi", d.voi},               {"total_bound", d.total_bound},
           {"voo_bound", d.voo_bound},   {"voi_bound", d.voi_bound},
           {"negative_voi", d.negative_voi}};
}

void to_json(json& j, const Witness& w) {
  j = json{{"history", w.history},
           {"action", w.action},
           {"reward", w.reward},
           {"next_state", w.next_state},
           {"delta", w.delta},
           {"f_step", w.f_step},
           {"tail_pre", w.tail_pre},
           {"tail_post", w.tail_post},
           {"truncation_bound", w.truncation_bound}};
}

void to_json(json& j, const BampfCertificate& c) {
  const char* verdict = c.verdict == BampfCertificate::Verdict::certified_bampf ? "certified_bampf"
                        : c.verdict == BampfCertificate::Verdict::witness_found ? "witness_found"
                                                                                : "inconclusive";
  j = json{{"verdict", verdict},
           {"witness", nullptr},
           {"max_residual", c.max_residual},
           {"truncation_bound", c.truncation_bound},
           {"transitions_checked", c.transitions_checked},
           {"depth", c.depth}};
  if (c.witness) j["witness"] = *c.witness;
}

void to_json(json& j, const ReturnEstimate& e) {
  j = json{{"g", e.g},
           {"g_shaped", e.g_shaped},
           {"half_width", e.half_width},
           {"half_width_shaped", e.half_width_shaped},
           {"tail_bound", e.tail_bound},
           {"tail_bound_shaped", e.tail_bound_shaped},
           {"exact", e.exact},
           {"samples", e.samples}};
}

void to_json(json& j, const RegretReport& r) {
  j = json{{"direct", r.direct},
           {"pdl", r.pdl},
           {"per_step", r.per_step},
           {"direct_bound", r.direct_bound},
           {"pdl_bound", r.pdl_bound},
           {"half_width", r.half_width},
           {"optimal_value", r.optimal_value},
           {"agent_value", r.agent_value},
           {"horizon", r.horizon},
           {"samples", r.samples}};
}

void to_json(json& j, const Theorem1Report& r) {
  j = json{{"action_sets_match", r.action_sets_match},
           {"value_shift_matches", r.value_shift_matches},
           {"states_checked", r.states_checked},
           {"max_action_violation", r.max_action_violation},
           {"max_shift_error", r.max_shift_error},
           {"shift_tolerance", r.shift_tolerance},
           {"pass", r.pass()}};
}

void to_json(json& j, const BoundReport& r) {
  j = json{{"name", r.name},       {"instance", r.instance}, {"measured", r.measured},
           {"bound", r.bound},     {"slack", r.slack},       {"satisfied", r.satisfied},
           {"k", r.k},             {"phi_max", r.phi_max},   {"r_max", r.r_max},
           {"discount", r.discount}};
}

std::string config_hash(const json& config) {
  const std::string dump = config.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string format_double(double x) { return json(x).dump(); }

std::string render_json_report(json body, const json& config) {
  body["schema_version"] = 1;
  body["config_hash"] = config_hash(config);
  return body.dump(2) + "\n";
}

std::string csv_stamp(const json& config) {
  return "# schema_version=1 config_hash=" + config_hash(config) + "\n";
}

std::string trace_csv(const std::vector<Trace>& traces, double discount, const json& config) {
  std::ostringstream out;
  out << csv_stamp(config) << "seed,t,s,a,r,F,G_partial\n";
  for (const Trace& tr : traces) {
    double g = 0.0, scale = 1.0;
    for (size_t t = 0; t < tr.steps.size(); ++t) {
      const TraceStep& st = tr.steps[t];
      g += scale * st.r;
      scale *= discount;
      out << tr.seed << ',' << t << ',' << st.s << ',' << st.a << ',' << format_double(st.r)
          << ',' << format_double(st.f) << ',' << format_double(g) << '\n';
    }
  }
  return out.str();
}

std::string heatmap_csv(const std::vector<HeatmapCell>& cells, const json& config) {
  std::ostringstream out;
  out << csv_stamp(config) << "x,y,value\n";
  for (const HeatmapCell& c : cells)
    out << c.x << ',' << c.y << ',' << format_double(c.value) << '\n';
  return out.str();
}

std::string kv_table_csv(const std::vector<std::pair<std::string, double>>& rows,
                         const json& config) {
  std::ostringstream out;
  out << csv_stamp(config) << "name,value\n";
  for (const auto& [name, value] : rows) out << name << ',' << format_double(value) << '\n';
  return out.str();
}

}  // namespace bampf
