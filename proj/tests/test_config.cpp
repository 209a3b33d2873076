#include <doctest.h>

#include <filesystem>

#include "reisim/config.hpp"
#include "reisim/error.hpp"
#include "reisim/recipe.hpp"

using namespace reisim;

TEST_SUITE("config") {

TEST_CASE("round trip is exact for preset and explicit scenarios") {
  for (const SimConfig& cfg :
       {scenario_grid_config(ScenarioId::S1, 15.0, 45.0),
        scenario_grid_config(ScenarioId::S6, 30.0, 45.0, -0.3),
        encoding_config(Encoding::miller4, -50.0), lane_rig_config(10.0)}) {
    const nlohmann::json doc = to_json(cfg);
    const SimConfig back = config_from_json(doc);
    CHECK(to_json(back) == doc);
    CHECK(config_hash(back) == config_hash(cfg));
  }
  SimConfig explicit_cfg = scenario_grid_config(ScenarioId::S2, 15.0, 45.0);
  explicit_cfg.preset.reset();
  const nlohmann::json doc = to_json(explicit_cfg);
  CHECK(doc["scenario"].contains("tags"));
  CHECK(to_json(config_from_json(doc)) == doc);
}

TEST_CASE("hash follows every field change") {
  const SimConfig a = scenario_grid_config(ScenarioId::S1, 15.0, 45.0);
  SimConfig b = a;
  b.gen2.tari_s = 6.25e-6;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.seed = 2;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.radio.tx_power_dbm += 0.5;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(hash_hex(config_hash(a)).size() == 16);
}

TEST_CASE("bare scenario names and degree aliases") {
  const nlohmann::json doc = {{"scenario", "S3"}, {"mount", {{"mount_angle_deg", 30.0}}}};
  const SimConfig cfg = config_from_json(doc);
  CHECK(cfg.scenario.id == ScenarioId::S3);
  CHECK(cfg.mount.mount_angle_rad == doctest::Approx(deg_to_rad(30.0)));
  CHECK(cfg.scenario.lateral_standoff_m == doctest::Approx(preset_standoff(ScenarioId::S3)));
}

TEST_CASE("errors name the offending key") {
  const auto key_of = [](const nlohmann::json& doc) -> std::string {
    try {
      config_from_json(doc);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return "";
  };
  CHECK(key_of({{"gen2", {{"tari_s", -1.0}}}}) == "gen2.tari_s");
  CHECK(key_of({{"radio", {{"frequency_hz", 2.4e9}}}}) == "radio.frequency_hz");
  CHECK(key_of({{"multipath", {{"excess_noise_sigma_db", -1.0}}}}) ==
        "multipath.excess_noise_sigma_db");
  CHECK_THROWS_AS(config_from_json({{"bogus", 1}}), UnknownParameter);
  CHECK_THROWS_AS(config_from_json({{"gen2", {{"encoding", "Miller3"}}}}), ValidationError);
  CHECK_THROWS_AS(parse_document("{ not json"), ParseError);
}

TEST_CASE("with_parameter edits a document") {
  const nlohmann::json base = to_json(scenario_grid_config(ScenarioId::S1, 15.0, 45.0));
  const nlohmann::json d = with_parameter(base, "gen2.encoding", "Miller2");
  CHECK(config_from_json(d).gen2.encoding == Encoding::miller2);
  const nlohmann::json a = with_parameter(base, "mount.mount_angle_deg", 10.0);
  CHECK(config_from_json(a).mount.mount_angle_rad == doctest::Approx(deg_to_rad(10.0)));
  CHECK_THROWS_AS(with_parameter(base, "gen2.nope", 1), UnknownParameter);
}

TEST_CASE("save and load") {
  const auto dir = std::filesystem::temp_directory_path() / "reisim_config_test";
  std::filesystem::remove_all(dir);
  const SimConfig cfg = scenario_grid_config(ScenarioId::S4, 20.0, 45.0);
  save_config(cfg, dir / "c.json");
  CHECK(canonical_dump(load_config(dir / "c.json")) == canonical_dump(cfg));
  std::filesystem::remove_all(dir);
}

}
