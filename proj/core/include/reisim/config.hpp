#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "reisim/engine.hpp"
#include "reisim/sensing.hpp"

namespace reisim {

/// Config documents are JSON. Unknown keys are rejected; every error names
/// the offending field path (e.g. "gen2.tari_s", "scenario.tags[3].z_m").
///
/// Angles may be given as `<name>_deg` or `<name>_rad`; they are written
/// back as `_rad` so a round trip is exact. A scenario given as a bare
/// string ("S1") or without a `tags` array is generated from its preset.

/// Canonical document for `cfg`. Preset-generated scenarios are written in
/// generator form, explicit ones with their full tag list.
nlohmann::json to_json(const SimConfig& cfg);

/// Throws ValidationError (or UnknownParameter) naming the offending key.
SimConfig config_from_json(const nlohmann::json& doc);

/// Throws ParseError on malformed JSON.
nlohmann::json parse_document(std::string_view text, const std::string& origin = "config");
nlohmann::json load_document(const std::filesystem::path& path);

SimConfig load_config(const std::filesystem::path& path);
void save_config(const SimConfig& cfg, const std::filesystem::path& path);

/// Two-space-indented canonical dump; the basis of the manifest hash.
std::string canonical_dump(const SimConfig& cfg);
std::uint64_t config_hash(const SimConfig& cfg);
std::string hash_hex(std::uint64_t h);

/// Sets the field at dotted `axis` (e.g. "mount.mount_angle_deg",
/// "scenario.speed_mph", "gen2.encoding") in a copy of `doc`. Setting one
/// spelling of an aliased field (`_deg`/`_rad`, speed forms) drops the others.
nlohmann::json with_parameter(const nlohmann::json& doc, const std::string& axis,
                              const nlohmann::json& value);

nlohmann::json to_json(const SensorTimingModel& model);
SensorTimingModel sensor_model_from_json(const nlohmann::json& doc);

}  // namespace reisim
