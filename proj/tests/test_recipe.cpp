#include <doctest.h>

#include <filesystem>
#include <map>
#include <sstream>

#include "reisim/config.hpp"
#include "reisim/error.hpp"
#include "reisim/io.hpp"
#include "reisim/recipe.hpp"

using namespace reisim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("reisim_recipe_test_" + name);
  fs::remove_all(p);
  return p;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return out;
}

std::size_t data_rows(const std::string& csv) {
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  return lines - 1;
}

ExperimentRecipe small_recipe() {
  ExperimentRecipe r;
  r.name = "speed-grid";
  SimConfig base = scenario_grid_config(ScenarioId::S1, 15.0, 45.0);
  r.base_config = to_json(base);
  r.sweeps = {{"scenario.speed_mph", {15.0, 30.0}}, {"gen2.encoding", {"FM0", "Miller2"}}};
  r.replications = 2;
  r.outputs = {"summary.csv", "summary.json", "traces"};
  return r;
}

}  // namespace

TEST_SUITE("recipe") {

TEST_CASE("scenario grid recipe writes 24 rows and reruns byte-identically") {
  const fs::path a = scratch("a"), b = scratch("b");
  RecipeOptions o;
  o.replications = 2;
  const RecipeReport ra = run_builtin_recipe("fig11-scenarios", a, o);
  const RecipeReport rb = run_builtin_recipe("fig11-scenarios", b, o);
  const auto sa = snapshot(ra.directory);
  CHECK(data_rows(sa.at("scenarios.csv")) == 24);
  CHECK(sa.count("manifest.json") == 1);
  CHECK(sa == snapshot(rb.directory));
  CHECK(ra.config_hash == rb.config_hash);

  const auto manifest = nlohmann::json::parse(sa.at("manifest.json"));
  CHECK(manifest.at("recipe") == "fig11-scenarios");
  for (const auto& f : manifest.at("files")) {
    const std::string& body = sa.at(f.at("name").get<std::string>());
    CHECK(f.at("bytes").get<std::size_t>() == body.size());
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("generic recipe grid and determinism") {
  const fs::path a = scratch("ga"), b = scratch("gb");
  const ExperimentRecipe r = small_recipe();
  const RecipeReport ra = run_recipe(r, a);
  run_recipe(r, b);
  const auto sa = snapshot(ra.directory);
  CHECK(data_rows(sa.at("summary.csv")) == 2 * 2 * 2);
  CHECK(sa == snapshot(b / r.name));
  CHECK(sa.count("recipe.json") == 1);
  CHECK(to_json(recipe_from_json(nlohmann::json::parse(sa.at("recipe.json")))) == to_json(r));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("an unknown preset fails before any output") {
  const fs::path out = scratch("bad");
  ExperimentRecipe r = small_recipe();
  r.sweeps.push_back({"scenario", {"S1", "S9"}});
  CHECK_THROWS_AS(run_recipe(r, out), ConfigError);
  CHECK_FALSE(fs::exists(out / r.name));
  CHECK_THROWS_AS(run_builtin_recipe("fig99", out), ConfigError);
  CHECK_FALSE(fs::exists(out / "fig99"));
  fs::remove_all(out);
}

TEST_CASE("recipe document validation") {
  nlohmann::json doc = to_json(small_recipe());
  CHECK_NOTHROW(recipe_from_json(doc));
  doc["colour"] = "blue";
  CHECK_THROWS_AS(recipe_from_json(doc), UnknownParameter);
  ExperimentRecipe bad = small_recipe();
  bad.name = "../escape";
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = small_recipe();
  bad.sweeps.push_back(bad.sweeps.front());
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK(is_builtin_recipe("fig9-encoding"));
  CHECK(builtin_recipe_names().size() == 4);
}

TEST_CASE("trace CSV round trip and line-numbered parse errors") {
  const RunResult r = run(scenario_grid_config(ScenarioId::S1, 30.0, 45.0));
  std::stringstream ss;
  write_trace_csv(ss, r.trace);
  const auto back = read_trace_csv(ss);
  REQUIRE(back.size() == r.trace.size());
  std::stringstream again;
  write_trace_csv(again, back);
  std::stringstream first;
  write_trace_csv(first, r.trace);
  CHECK(again.str() == first.str());

  std::stringstream rounds;
  write_interrogations_csv(rounds, r.interrogations);
  CHECK(read_interrogations_csv(rounds).size() == r.interrogations.size());

  std::stringstream bad("t_s,tag_id,epc_hex,round_index,x_m,y_m,snr_db\n0.1,0,ab,1,2,3,4\nx,0,ab,1,2,3,4\n");
  try {
    read_trace_csv(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.key() == "trace:3");
  }
}

TEST_CASE("timing table rows") {
  std::stringstream ss;
  write_timing_table_csv(ss, Gen2Params{});
  const std::string t = ss.str();
  CHECK(t.find("QueryRep,4,112.5\n") != std::string::npos);
  CHECK(t.find("reply.rn16,16,71.875\n") != std::string::npos);
}

}
