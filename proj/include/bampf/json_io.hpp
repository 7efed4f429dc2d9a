#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bampf/certify.hpp"
#include "bampf/envs.hpp"
#include "bampf/eval.hpp"
#include "bampf/planner.hpp"

namespace bampf {

// ADL serializers so `nlohmann::json j = value;` works for report types.
void to_json(nlohmann::json& j, const Belief& b);
void to_json(nlohmann::json& j, const History& h);
void to_json(nlohmann::json& j, const PlanResult& r);
void to_json(nlohmann::json& j, const Decomposition& d);
void to_json(nlohmann::json& j, const Witness& w);
void to_json(nlohmann::json& j, const BampfCertificate& c);
void to_json(nlohmann::json& j, const ReturnEstimate& e);
void to_json(nlohmann::json& j, const RegretReport& r);
void to_json(nlohmann::json& j, const Theorem1Report& r);
void to_json(nlohmann::json& j, const BoundReport& r);

/** FNV-1a (64-bit) of the document's canonical dump, as 16 hex digits. */
std::string config_hash(const nlohmann::json& config);

/** Shortest decimal form of x that parses back to exactly x. */
std::string format_double(double x);

/**
 * Finished JSON report: `body` plus schema_version and the hash of `config`.
 * Every artifact the command-line tool writes goes through here or through
 * one of the CSV renderers below, which embed the same pair in a leading
 * comment line.
 */
std::string render_json_report(nlohmann::json body, const nlohmann::json& config);

/** `# schema_version=1 config_hash=<hash>` comment line, newline-terminated. */
std::string csv_stamp(const nlohmann::json& config);

/** Columns: seed,t,s,a,r,F,G_partial (running discounted extrinsic return). */
std::string trace_csv(const std::vector<Trace>& traces, double discount,
                      const nlohmann::json& config);

struct HeatmapCell {
  int x = 0;
  int y = 0;
  double value = 0.0;
};

/** Columns: x,y,value. */
std::string heatmap_csv(const std::vector<HeatmapCell>& cells, const nlohmann::json& config);

/** Columns: name,value — small summary tables. */
std::string kv_table_csv(const std::vector<std::pair<std::string, double>>& rows,
                         const nlohmann::json& config);

}  // namespace bampf
