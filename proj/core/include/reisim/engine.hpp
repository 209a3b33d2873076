#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reisim/gen2.hpp"
#include "reisim/geometry.hpp"
#include "reisim/rflink.hpp"

namespace reisim {

enum class TraceDetail { events_only, full_protocol };

std::string_view to_string(TraceDetail d);
std::optional<TraceDetail> trace_detail_from_string(std::string_view s);

/// Lane-positioning settings carried with a run. The window length must stay
/// below tau_max(W, v, alpha_max) for the scenario's fastest segment.
struct LaneSettings {
  std::optional<double> tau_s;
};

/// Generator parameters of a preset scenario. When a config carries one,
/// its tags are rebuilt from it rather than stored explicitly.
struct ScenarioPreset {
  PresetOptions sign;
  LaneMarkerLayout markers;
};

struct SimConfig {
  RoadScenario scenario;
  std::optional<ScenarioPreset> preset;
  AntennaMount mount;
  RadioConfig radio;
  MultipathModel multipath;
  Gen2Params gen2;
  BerModel ber;
  LaneSettings lane;
  double duration_s = 10.0;
  std::uint64_t seed = 1;
  TraceDetail trace_detail = TraceDetail::events_only;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct ReadEvent {
  double t = 0.0;
  std::size_t tag_id = 0;
  std::string epc;
  std::uint64_t round_index = 0;
  Pose2D vehicle_pose_at_read;
  double snr_at_read_db = kNegInf;
};

struct RunSummary {
  std::vector<std::uint64_t> total_reads_per_tag;
  std::uint64_t total_reads = 0;
  double reads_per_second = 0.0;
  /// In-beam time of each tag within the run; 0 when it never enters.
  std::vector<double> dwell_per_tag;
  std::map<OutcomeKind, std::uint64_t> outcome_histogram;
  std::uint64_t rounds = 0;
  double duration_s = 0.0;
};

struct RunResult {
  std::vector<ReadEvent> trace;
  RunSummary summary;
  /// One entry per Query (inventory round) issued.
  std::vector<RoundRecord> interrogations;
  /// Filled only with TraceDetail::full_protocol.
  std::vector<InventoryOutcome> protocol;
};

/// EPC of tag `index`, as 24 hex digits.
std::string epc_hex(std::size_t index);

/// Regenerates cfg.scenario from `preset` for scenario `id`, keeping the
/// lane width, turn-angle bound and lateral profile already in cfg.scenario.
void apply_preset(SimConfig& cfg, ScenarioId id, const ScenarioPreset& preset);

/// Shorthand for a default config on preset `id`.
SimConfig preset_config(ScenarioId id, const ScenarioPreset& preset = {});

RunResult run(const SimConfig& cfg);

/// One run per value of the config field at `axis` (a dotted path such as
/// "mount.mount_angle_deg" or "gen2.encoding"). Run i uses the sub-seed
/// derive_seed(base.seed, sweep, i). Throws UnknownParameter for a bad axis.
std::vector<RunSummary> sweep(const SimConfig& base, const std::string& axis,
                              const std::vector<nlohmann::json>& values, int jobs = 1);
/// Same, over a config document in source form, so preset-generated geometry
/// (standoff, sign height, ...) follows the swept field.
std::vector<RunSummary> sweep(const nlohmann::json& base, const std::string& axis,
                              const std::vector<nlohmann::json>& values, int jobs = 1);

/// Applies `value` at `axis` and returns the modified config.
SimConfig with_parameter(const SimConfig& base, const std::string& axis,
                         const nlohmann::json& value);

}  // namespace reisim

#include "reisim/detail/parallel.hpp"
