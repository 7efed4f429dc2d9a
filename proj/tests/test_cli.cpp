#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bampf/cli.hpp"

using namespace bampf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run_command(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / "bampf_cli_tests" / tag;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(static_cast<bool>(f));
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

bool is_hex16(const std::string& s) {
  if (s.size() != 16) return false;
  for (char c : s)
    if (std::string("0123456789abcdef").find(c) == std::string::npos) return false;
  return true;
}

// Usage failures print CLI11's human-readable message first; the
// machine-readable record is always the final line of stderr.
json error_record(const std::string& err) {
  std::istringstream in(err);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return json::parse(last);
}

}  // namespace

TEST_CASE("plan prints a stamped report and mirrors it to disk") {
  fs::path dir = fresh_dir("plan");
  CliRun r = run({"plan", "--env", "caterpillar", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());

  json doc = json::parse(r.out);
  CHECK(doc["schema_version"] == 1);
  CHECK(is_hex16(doc["config_hash"].get<std::string>()));
  CHECK(doc["command"] == "plan");
  CHECK(doc["expected_value"].get<double>() == doctest::Approx(600.0265).epsilon(1e-4));
  CHECK(doc["initial_states"][0]["optimal_action_labels"] == json::array({"go"}));

  CHECK(slurp(dir / "plan.json") == r.out);
  json config = json::parse(slurp(dir / "config.json"));
  CHECK(config["subcommand"] == "plan");
  CHECK(config["env"] == "caterpillar");
}

TEST_CASE("reruns of the same command are byte-identical") {
  fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  std::vector<std::string> base = {"rollout",  "--env",   "caterpillar", "--agent",
                                   "epsgreedy:0.3:kstep:4", "--seeds", "0..7",       "--horizon",
                                   "25"};
  auto with_out = [&](const fs::path& dir, int jobs) {
    std::vector<std::string> args = base;
    args.insert(args.end(), {"--out", dir.string(), "--jobs", std::to_string(jobs)});
    return run(args);
  };
  CliRun ra = with_out(a, 1);
  CliRun rb = with_out(b, 3);
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(ra.out == rb.out);
  CHECK(slurp(a / "traces.csv") == slurp(b / "traces.csv"));
  CHECK(slurp(a / "rollout.json") == slurp(b / "rollout.json"));
}

TEST_CASE("trace files carry the stamp, the schema header and every step") {
  fs::path dir = fresh_dir("traces");
  CliRun r = run({"rollout", "--env", "caterpillar", "--agent", "ce_exact", "--seeds", "0..4",
                  "--horizon", "20", "--out", dir.string()});
  REQUIRE(r.code == 0);

  std::istringstream csv(slurp(dir / "traces.csv"));
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line.rfind("# schema_version=1 config_hash=", 0) == 0);
  CHECK(is_hex16(line.substr(line.size() - 16)));
  REQUIRE(std::getline(csv, line));
  CHECK(line == "seed,t,s,a,r,F,G_partial");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 5 * 20);

  // Stay-at-home return truncated at 20 steps: 21 * (1 - 0.95^20) / 0.05.
  json doc = json::parse(r.out);
  CHECK(doc["mean_return"].get<double>() ==
        doctest::Approx(420.0 * (1.0 - std::pow(0.95, 20))).epsilon(1e-9));
}

TEST_CASE("--builtin is an alias for --shaping") {
  fs::path a = fresh_dir("alias_a"), b = fresh_dir("alias_b");
  CliRun ra = run({"plan", "--env", "caterpillar", "--shaping", "information_gain", "--out",
                   a.string()});
  CliRun rb = run({"plan", "--env", "caterpillar", "--builtin", "information_gain", "--out",
                   b.string()});
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(ra.out == rb.out);
}

TEST_CASE("failures print one machine-readable error record and exit 1") {
  CliRun r = run({"plan", "--env", "spiral", "--out", fresh_dir("err_env").string()});
  CHECK(r.code == 1);
  json rec = json::parse(r.err);
  CHECK(rec["schema_version"] == 1);
  CHECK(rec["error"]["type"] == "validation");
  CHECK(rec["error"]["message"] == "unknown benchmark 'spiral'");

  r = run({});
  CHECK(r.code == 1);
  CHECK(error_record(r.err)["error"]["type"] == "usage");

  r = run({"plan", "--env", "caterpillar", "--frobnicate"});
  CHECK(r.code == 1);
  CHECK(error_record(r.err)["error"]["type"] == "usage");

  r = run({"plan", "--env", "caterpillar", "--spec", "x.json"});
  CHECK(r.code == 1);
  CHECK(error_record(r.err)["error"]["message"] ==
        "--env and --spec are mutually exclusive");

  r = run({"rollout", "--env", "caterpillar", "--agent", "qlearn",
           "--out", fresh_dir("err_agent").string()});
  CHECK(r.code == 1);
  std::string msg = error_record(r.err)["error"]["message"];
  CHECK(msg.find("unknown agent spec 'qlearn'") == 0);
}

TEST_CASE("certification exits 0 on a certificate and 2 on a witness") {
  fs::path ok = fresh_dir("cert_ok");
  CliRun r = run({"check-bampf", "--env", "caterpillar", "--shaping", "information_gain",
                  "--depth", "3", "--out", ok.string()});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["verdict"] == "certified_bampf");
  CHECK(fs::exists(ok / "certificate.json"));

  fs::path bad = fresh_dir("cert_bad");
  r = run({"check-bampf", "--env", "noisy_coin", "--shaping", "prediction_error", "--depth",
           "3", "--out", bad.string()});
  CHECK(r.code == 2);
  CHECK(json::parse(r.out)["verdict"] == "witness_found");
  json rec = json::parse(r.err);
  CHECK(rec["error"]["type"] == "verification");

  // The report is still written before the non-zero exit.
  CHECK(fs::exists(bad / "certificate.json"));
}

TEST_CASE("a confirmed counterexample exits 0 and writes a loadable instance") {
  fs::path dir = fresh_dir("cex");
  CliRun r = run({"counterexample", "--env", "noisy_coin", "--shaping", "prediction_error",
                  "--depth", "3", "--out", dir.string()});
  REQUIRE(r.code == 0);
  json doc = json::parse(r.out);
  CHECK(doc["confirmed"] == true);
  CHECK(doc["delta"].get<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-6));

  // The emitted instance is a valid spec a later run can plan on.
  fs::path inst = dir / "counterexample_instance.json";
  REQUIRE(fs::exists(inst));
  CliRun plan = run({"plan", "--spec", inst.string(), "--out",
                     fresh_dir("cex_plan").string()});
  CHECK(plan.code == 0);

  // Asking for a counterexample to an actual potential fails verification.
  r = run({"counterexample", "--env", "caterpillar", "--shaping", "information_gain", "--out",
           fresh_dir("cex_none").string()});
  CHECK(r.code == 2);
  CHECK(json::parse(r.err)["error"]["message"].get<std::string>().find("no witness") == 0);
}

TEST_CASE("bounds verification covers all four statements and exits 0") {
  fs::path dir = fresh_dir("bounds");
  CliRun r = run({"bounds", "all", "--env", "caterpillar", "--shaping", "information_gain",
                  "--k", "1,3", "--horizon", "60", "--out", dir.string()});
  REQUIRE(r.code == 0);
  json doc = json::parse(r.out);
  CHECK(doc["all_satisfied"] == true);
  // cor2 for three agents, kstep and cor3 for two k each, one d-horizon row.
  CHECK(doc["reports"].size() == 3 + 2 + 2 + 1);
}

TEST_CASE("generated random specs feed straight back into the planner") {
  fs::path dir = fresh_dir("gen");
  CliRun r = run({"gen-random", "--seeds", "3,4", "--out", dir.string()});
  REQUIRE(r.code == 0);
  json doc = json::parse(r.out);
  CHECK(doc["files"] == json::array({"random_3.json", "random_4.json"}));
  REQUIRE(fs::exists(dir / "random_3.json"));

  CliRun plan = run({"plan", "--spec", (dir / "random_3.json").string(), "--horizon", "4",
                     "--out", fresh_dir("gen_plan").string()});
  CHECK(plan.code == 0);
}

TEST_CASE("the output directory falls back to the environment variable") {
  fs::path dir = fresh_dir("envvar");
  setenv("BAMPF_LAB_OUT", dir.string().c_str(), 1);
  CliRun r = run({"plan", "--env", "noisy_coin"});
  unsetenv("BAMPF_LAB_OUT");
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "plan.json"));
  CHECK(fs::exists(dir / "config.json"));
}

TEST_CASE("decompose writes the value-of-information table") {
  fs::path dir = fresh_dir("decompose");
  CliRun r = run({"decompose", "--env", "caterpillar", "--depth", "2", "--out", dir.string()});
  REQUIRE(r.code == 0);

  std::istringstream csv(r.out);
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line.rfind("# schema_version=1 config_hash=", 0) == 0);
  REQUIRE(std::getline(csv, line));
  CHECK(line == "depth,state,belief,total,voo,voi,total_bound,voo_bound,voi_bound,negative_voi");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows > 0);
  CHECK(r.out == slurp(dir / "decompose.csv"));
}

TEST_CASE("the worked-example reproduction emits its summary table") {
  fs::path dir = fresh_dir("repro");
  CliRun r = run({"reproduce", "caterpillar", "--out", dir.string()});
  REQUIRE(r.code == 0);
  std::string table = slurp(dir / "caterpillar.csv");
  CHECK(table.find("bayes_q_go,") != std::string::npos);
  CHECK(table.find("bayes_q_stay,") != std::string::npos);
  CHECK(table.find("regret_direct,") != std::string::npos);
}
