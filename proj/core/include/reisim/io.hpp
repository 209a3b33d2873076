#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reisim/engine.hpp"
#include "reisim/sensing.hpp"

namespace reisim {

/// Fixed `%.9g` formatting so outputs are byte-stable across runs.
std::string format_number(double v);

/// Columns: t_s, tag_id, epc_hex, round_index, x_m, y_m, snr_db.
void write_trace_csv(std::ostream& out, const std::vector<ReadEvent>& trace);
/// Columns: round_index, t_start_s, q, target.
void write_interrogations_csv(std::ostream& out, const std::vector<RoundRecord>& rounds);
/// Columns: result, t_start_s, t_end_s, steps, rn16, snr_db.
void write_protocol_csv(std::ostream& out, const std::vector<InventoryOutcome>& outcomes);

nlohmann::json to_json(const RunSummary& summary);
/// `key = value` lines, one per summary field and outcome kind.
void write_summary_text(std::ostream& out, const RunSummary& summary);

/// Per-command and per-reply durations of `p`, plus the composite slot
/// and round durations. Columns: item, bits, duration_us.
void write_timing_table_csv(std::ostream& out, const Gen2Params& p);

/// Columns: distance_m, median_s, p10_s, p90_s, attempts_mean, success_fraction.
void write_sensor_sweep_csv(std::ostream& out, const std::vector<SensorSweepRow>& rows);

/// Reads a trace written by write_trace_csv. Throws ParseError.
std::vector<ReadEvent> read_trace_csv(std::istream& in);
std::vector<RoundRecord> read_interrogations_csv(std::istream& in);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace reisim
