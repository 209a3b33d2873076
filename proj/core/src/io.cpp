#include "reisim/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "reisim/error.hpp"

namespace reisim {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const std::vector<ReadEvent>& trace) {
  out << "t_s,tag_id,epc_hex,round_index,x_m,y_m,snr_db\n";
  for (const ReadEvent& e : trace) {
    out << format_number(e.t) << ',' << e.tag_id << ',' << e.epc << ',' << e.round_index << ','
        << format_number(e.vehicle_pose_at_read.x) << ','
        << format_number(e.vehicle_pose_at_read.y) << ',' << format_number(e.snr_at_read_db)
        << '\n';
  }
}

void write_interrogations_csv(std::ostream& out, const std::vector<RoundRecord>& rounds) {
  out << "round_index,t_start_s,q,target\n";
  for (const RoundRecord& r : rounds) {
    out << r.round_index << ',' << format_number(r.t_start) << ',' << r.q << ','
        << (r.target == InventoriedFlag::a ? 'A' : 'B') << '\n';
  }
}

void write_protocol_csv(std::ostream& out, const std::vector<InventoryOutcome>& outcomes) {
  out << "result,t_start_s,t_end_s,steps,rn16,snr_db\n";
  for (const InventoryOutcome& o : outcomes) {
    out << to_string(o.result) << ',' << format_number(o.t_start) << ','
        << format_number(o.t_end) << ',';
    for (std::size_t i = 0; i < o.commands_exchanged.size(); ++i) {
      if (i > 0) out << ' ';
      out << o.commands_exchanged[i].name;
    }
    out << ',' << o.rn16 << ',' << format_number(o.snr_db) << '\n';
  }
}

nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [kind, count] : s.outcome_histogram) hist[std::string(to_string(kind))] = count;
  return {
      {"total_reads", s.total_reads},
      {"reads_per_second", s.reads_per_second},
      {"rounds", s.rounds},
      {"duration_s", s.duration_s},
      {"total_reads_per_tag", s.total_reads_per_tag},
      {"dwell_per_tag_s", s.dwell_per_tag},
      {"outcome_histogram", hist},
  };
}

void write_summary_text(std::ostream& out, const RunSummary& s) {
  out << "duration_s = " << format_number(s.duration_s) << '\n';
  out << "total_reads = " << s.total_reads << '\n';
  out << "reads_per_second = " << format_number(s.reads_per_second) << '\n';
  out << "rounds = " << s.rounds << '\n';
  for (const auto& [kind, count] : s.outcome_histogram) {
    out << "outcome." << to_string(kind) << " = " << count << '\n';
  }
  for (std::size_t i = 0; i < s.total_reads_per_tag.size(); ++i) {
    out << "tag." << i << ".reads = " << s.total_reads_per_tag[i] << '\n';
    if (i < s.dwell_per_tag.size()) {
      out << "tag." << i << ".dwell_s = " << format_number(s.dwell_per_tag[i]) << '\n';
    }
  }
}

void write_timing_table_csv(std::ostream& out, const Gen2Params& p) {
  out << "item,bits,duration_us\n";
  const auto row = [&](std::string_view item, long bits, double seconds) {
    out << item << ',';
    if (bits >= 0) out << bits;
    out << ',' << format_number(seconds * 1e6) << '\n';
  };
  CommandFields fields;
  fields.q = static_cast<int>(p.q_init);
  for (Command c : {Command::query, Command::query_rep, Command::query_adjust, Command::ack,
                    Command::nak, Command::req_rn, Command::read}) {
    row(to_string(c), static_cast<long>(command_bits(c, p, fields).size()),
        command_duration(c, p, fields));
  }
  row("reply.rn16", p.rn16_bits, tag_reply_duration(p.rn16_bits, p));
  row("reply.epc", p.epc_reply_bits, tag_reply_duration(p.epc_reply_bits, p));
  row("reply.handle", kHandleReplyBits, tag_reply_duration(kHandleReplyBits, p));
  row("reply.read_1_word", read_reply_bits(1), tag_reply_duration(read_reply_bits(1), p));
  row("T1", -1, p.t1_s());
  row("T2", -1, p.t2_s());
  row("T3", -1, p.t3_s());
  row("slot.idle_query_rep", -1, idle_slot_duration(Command::query_rep, p));
  row("slot.collision_query_rep", -1, collision_slot_duration(Command::query_rep, p));
  row("round.single_tag_q0", -1, single_tag_round_duration(p, 0, InventoriedFlag::a));
}

void write_sensor_sweep_csv(std::ostream& out, const std::vector<SensorSweepRow>& rows) {
  out << "distance_m,median_s,p10_s,p90_s,attempts_mean,success_fraction\n";
  for (const SensorSweepRow& r : rows) {
    out << format_number(r.distance_m) << ',' << format_number(r.median_s) << ','
        << format_number(r.p10_s) << ',' << format_number(r.p90_s) << ','
        << format_number(r.attempts_mean) << ',' << format_number(r.success_fraction) << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double to_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(where, "not a number: '" + s + "'");
}

std::uint64_t to_u64(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(where, "not an unsigned integer: '" + s + "'");
}

template <typename Row>
std::vector<Row> read_rows(std::istream& in, const std::string& header, std::size_t columns,
                           const std::string& what, Row (*parse)(const std::vector<std::string>&,
                                                                  const std::string&)) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ParseError(what, "expected header '" + header + "'");
  }
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = what + ":" + std::to_string(lineno);
    if (cells.size() != columns) {
      throw ParseError(where, "expected " + std::to_string(columns) + " columns");
    }
    rows.push_back(parse(cells, where));
  }
  return rows;
}

ReadEvent parse_event(const std::vector<std::string>& c, const std::string& where) {
  ReadEvent e;
  e.t = to_double(c[0], where);
  e.tag_id = static_cast<std::size_t>(to_u64(c[1], where));
  e.epc = c[2];
  e.round_index = to_u64(c[3], where);
  e.vehicle_pose_at_read.x = to_double(c[4], where);
  e.vehicle_pose_at_read.y = to_double(c[5], where);
  e.snr_at_read_db = to_double(c[6], where);
  return e;
}

RoundRecord parse_round(const std::vector<std::string>& c, const std::string& where) {
  RoundRecord r;
  r.round_index = to_u64(c[0], where);
  r.t_start = to_double(c[1], where);
  r.q = static_cast<int>(to_u64(c[2], where));
  if (c[3] != "A" && c[3] != "B") throw ParseError(where, "target must be A or B");
  r.target = c[3] == "A" ? InventoriedFlag::a : InventoriedFlag::b;
  return r;
}

}  // namespace

std::vector<ReadEvent> read_trace_csv(std::istream& in) {
  return read_rows<ReadEvent>(in, "t_s,tag_id,epc_hex,round_index,x_m,y_m,snr_db", 7, "trace",
                              &parse_event);
}

std::vector<RoundRecord> read_interrogations_csv(std::istream& in) {
  return read_rows<RoundRecord>(in, "round_index,t_start_s,q,target", 4, "interrogations",
                                &parse_round);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace reisim
