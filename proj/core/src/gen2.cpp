#include "reisim/gen2.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "reisim/error.hpp"
#include "reisim/rng.hpp"

namespace reisim {

std::string_view to_string(Command c) {
  switch (c) {
    case Command::query: return "Query";
    case Command::query_rep: return "QueryRep";
    case Command::query_adjust: return "QueryAdjust";
    case Command::ack: return "ACK";
    case Command::req_rn: return "ReqRN";
    case Command::read: return "Read";
    case Command::nak: return "NAK";
  }
  return "Query";
}

std::string_view to_string(Session s) {
  switch (s) {
    case Session::s0: return "S0";
    case Session::s1: return "S1";
    case Session::s2: return "S2";
    case Session::s3: return "S3";
  }
  return "S0";
}

std::string_view to_string(TargetMode m) {
  return m == TargetMode::single_target ? "single_target" : "dual_target";
}

std::string_view to_string(PilotTone p) {
  switch (p) {
    case PilotTone::automatic: return "auto";
    case PilotTone::on: return "on";
    case PilotTone::off: return "off";
  }
  return "auto";
}

std::optional<Session> session_from_string(std::string_view s) {
  for (Session x : {Session::s0, Session::s1, Session::s2, Session::s3}) {
    if (to_string(x) == s) return x;
  }
  if (s == "s0") return Session::s0;
  if (s == "s1") return Session::s1;
  if (s == "s2") return Session::s2;
  if (s == "s3") return Session::s3;
  return std::nullopt;
}

std::optional<TargetMode> target_mode_from_string(std::string_view s) {
  if (s == "single_target" || s == "single") return TargetMode::single_target;
  if (s == "dual_target" || s == "dual") return TargetMode::dual_target;
  return std::nullopt;
}

std::optional<PilotTone> pilot_tone_from_string(std::string_view s) {
  for (PilotTone x : {PilotTone::automatic, PilotTone::on, PilotTone::off}) {
    if (to_string(x) == s) return x;
  }
  return std::nullopt;
}

std::string_view to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::success: return "success";
    case OutcomeKind::collision: return "collision";
    case OutcomeKind::idle_slot: return "idle_slot";
    case OutcomeKind::link_margin_failure: return "link_margin_failure";
    case OutcomeKind::truncated_by_exit: return "truncated_by_exit";
    case OutcomeKind::ack_timeout: return "ack_timeout";
    case OutcomeKind::decode_failure: return "decode_failure";
  }
  return "success";
}

// ---------------------------------------------------------------------------

double Gen2Params::rtcal_s() const {
  return rtcal_override_s ? *rtcal_override_s : tari_s * (1.0 + data1_ratio);
}

double Gen2Params::trcal_s() const {
  return trcal_override_s ? *trcal_override_s : dr / blf_hz;
}

double Gen2Params::blf() const { return trcal_override_s ? dr / *trcal_override_s : blf_hz; }

double Gen2Params::t1_s() const {
  return t1_override_s ? *t1_override_s : std::max(rtcal_s(), 10.0 * tpri_s());
}

double Gen2Params::t2_s() const { return t2_override_s ? *t2_override_s : 10.0 * tpri_s(); }

double Gen2Params::t3_s() const { return t3_override_s ? *t3_override_s : 10.0 * tpri_s(); }

bool Gen2Params::trext() const {
  switch (pilot) {
    case PilotTone::on: return true;
    case PilotTone::off: return false;
    case PilotTone::automatic: return encoding != Encoding::fm0;
  }
  return false;
}

void Gen2Params::validate() const {
  if (!(tari_s >= 6.25e-6 && tari_s <= 25e-6)) {
    throw ValidationError("gen2.tari_s", "must lie in [6.25e-6, 25e-6]");
  }
  if (!(data1_ratio >= 1.5 && data1_ratio <= 2.0)) {
    throw ValidationError("gen2.data1_ratio", "must lie in [1.5, 2]");
  }
  if (!(std::abs(dr - 8.0) < 1e-9 || std::abs(dr - 64.0 / 3.0) < 1e-9)) {
    throw ValidationError("gen2.dr", "must be 8 or 64/3");
  }
  if (!(blf() >= 40e3 && blf() <= 640e3)) {
    throw ValidationError(trcal_override_s ? "gen2.trcal_s" : "gen2.blf_hz",
                          "backscatter link frequency must lie in [40e3, 640e3] Hz");
  }
  if (!(delimiter_s > 0.0)) throw ValidationError("gen2.delimiter_s", "must be > 0");
  const double rt = rtcal_s();
  if (!(rt >= 2.5 * tari_s - 1e-12 && rt <= 3.0 * tari_s + 1e-12)) {
    throw ValidationError("gen2.rtcal_s", "must lie in [2.5, 3] * tari");
  }
  const double tr = trcal_s();
  if (!(tr >= 1.1 * rt - 1e-12 && tr <= 3.0 * rt + 1e-12)) {
    throw ValidationError(trcal_override_s ? "gen2.trcal_s" : "gen2.blf_hz",
                          "trcal must lie in [1.1, 3] * rtcal");
  }
  if (t1_override_s) {
    const double nominal = std::max(rt, 10.0 * tpri_s());
    const double lo = nominal * 0.75 - 2e-6;
    const double hi = nominal * 1.25 + 2e-6;
    if (!(*t1_override_s > 0.0 && *t1_override_s >= lo && *t1_override_s <= hi)) {
      throw ValidationError("gen2.t1_s", "must lie within tolerance of max(rtcal, 10/blf)");
    }
  }
  if (t2_override_s && !(*t2_override_s > 0.0)) {
    throw ValidationError("gen2.t2_s", "must be > 0");
  }
  if (t3_override_s && !(*t3_override_s > 0.0)) {
    throw ValidationError("gen2.t3_s", "must be > 0");
  }
  if (!(q_init >= 0 && q_init <= 15)) throw ValidationError("gen2.q_init", "must lie in [0, 15]");
  if (!(q_step > 0.0 && q_step <= 1.0)) throw ValidationError("gen2.q_step", "must lie in (0, 1]");
  if (epc_reply_bits <= 0) throw ValidationError("gen2.epc_reply_bits", "must be > 0");
  if (rn16_bits <= 0) throw ValidationError("gen2.rn16_bits", "must be > 0");
  if (!(s1_persistence_s > 0.0)) {
    throw ValidationError("gen2.s1_persistence_s", "must be > 0");
  }
}

// ---------------------------------------------------------------------------

std::uint8_t crc5(const std::vector<bool>& bits) {
  std::uint8_t reg = 0b01001;
  for (bool b : bits) {
    const bool fb = ((reg >> 4) & 1U) != static_cast<unsigned>(b);
    reg = static_cast<std::uint8_t>((reg << 1) & 0x1F);
    if (fb) reg ^= 0x09;
  }
  return reg;
}

std::uint16_t crc16(const std::vector<bool>& bits) {
  std::uint16_t reg = 0xFFFF;
  for (bool b : bits) {
    const bool fb = ((reg >> 15) & 1U) != static_cast<unsigned>(b);
    reg = static_cast<std::uint16_t>(reg << 1);
    if (fb) reg ^= 0x1021;
  }
  return static_cast<std::uint16_t>(~reg);
}

void append_bits(BitString& out, std::uint32_t value, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(((value >> i) & 1U) != 0);
}

namespace {

void append_ebv(BitString& out, std::uint32_t value) {
  std::vector<std::uint32_t> groups;
  do {
    groups.push_back(value & 0x7F);
    value >>= 7;
  } while (value != 0);
  for (std::size_t i = groups.size(); i-- > 0;) {
    out.push_back(i != 0);
    append_bits(out, groups[i], 7);
  }
}

void append_crc16(BitString& out) {
  const std::uint16_t crc = crc16(out);
  append_bits(out, crc, 16);
}

std::uint32_t miller_code(Encoding e) {
  switch (e) {
    case Encoding::fm0: return 0b00;
    case Encoding::miller2: return 0b01;
    case Encoding::miller4: return 0b10;
    case Encoding::miller8: return 0b11;
  }
  return 0;
}

}  // namespace

BitString command_bits(Command command, const Gen2Params& p, const CommandFields& f) {
  BitString bits;
  const auto session = static_cast<std::uint32_t>(p.session);
  switch (command) {
    case Command::query: {
      append_bits(bits, 0b1000, 4);
      bits.push_back(std::abs(p.dr - 8.0) > 1e-9);
      append_bits(bits, miller_code(p.encoding), 2);
      bits.push_back(p.trext());
      append_bits(bits, 0b00, 2);  // Sel: all
      append_bits(bits, session, 2);
      bits.push_back(f.target == InventoriedFlag::b);
      append_bits(bits, static_cast<std::uint32_t>(std::clamp(f.q, 0, 15)), 4);
      append_bits(bits, crc5(bits), 5);
      break;
    }
    case Command::query_rep:
      append_bits(bits, 0b00, 2);
      append_bits(bits, session, 2);
      break;
    case Command::query_adjust: {
      append_bits(bits, 0b1001, 4);
      append_bits(bits, session, 2);
      const std::uint32_t updn = f.up_down > 0 ? 0b110 : (f.up_down < 0 ? 0b011 : 0b000);
      append_bits(bits, updn, 3);
      break;
    }
    case Command::ack:
      append_bits(bits, 0b01, 2);
      append_bits(bits, f.rn16, 16);
      break;
    case Command::nak:
      append_bits(bits, 0b11000000, 8);
      break;
    case Command::req_rn:
      append_bits(bits, 0b11000001, 8);
      append_bits(bits, f.rn16, 16);
      append_crc16(bits);
      break;
    case Command::read:
      append_bits(bits, 0b11000010, 8);
      append_bits(bits, f.mem_bank & 0b11U, 2);
      append_ebv(bits, f.word_ptr);
      append_bits(bits, f.word_count, 8);
      append_bits(bits, f.rn16, 16);
      append_crc16(bits);
      break;
  }
  return bits;
}

double reader_transmission_duration(const std::vector<bool>& bits, bool preamble,
                                    const Gen2Params& p) {
  double d = p.delimiter_s + p.tari_s + p.rtcal_s();
  if (preamble) d += p.trcal_s();
  for (bool b : bits) d += b ? p.data1_s() : p.tari_s;
  return d;
}

double command_duration(Command command, const Gen2Params& p, const CommandFields& fields) {
  const BitString bits = command_bits(command, p, fields);
  return reader_transmission_duration(bits, command == Command::query, p);
}

int reply_preamble_symbols(const Gen2Params& p) {
  if (p.encoding == Encoding::fm0) return p.trext() ? 18 : 6;
  return p.trext() ? 22 : 10;
}

double tag_reply_duration(int bits, const Gen2Params& p) {
  return static_cast<double>(reply_preamble_symbols(p) + bits + 1) * p.m() / p.blf();
}

int read_reply_bits(int word_count) { return 1 + 16 * word_count + 16 + 16; }

// ---------------------------------------------------------------------------

void on_power_loss(TagSessionState& state, const Gen2Params& p, double t) {
  if (state.powered) state.unpowered_since_s = t;
  state.powered = false;
  state.in_round = false;
  if (p.session == Session::s0) state.inventoried_flag = InventoriedFlag::a;
}

void on_powered(TagSessionState& state, const Gen2Params& p, double t) {
  if (!state.powered && (p.session == Session::s2 || p.session == Session::s3) &&
      t - state.unpowered_since_s > p.s1_persistence_s) {
    state.inventoried_flag = InventoriedFlag::a;
  }
  if (p.session == Session::s1 && state.inventoried_flag == InventoriedFlag::b &&
      t - state.flag_set_at_s > p.s1_persistence_s) {
    state.inventoried_flag = InventoriedFlag::a;
  }
  state.powered = true;
}

TagStreams TagStreams::make(std::uint64_t seed, std::uint64_t tag_id) {
  return TagStreams{make_stream(seed, StreamComponent::slots, tag_id),
                    make_stream(seed, StreamComponent::rn16, tag_id),
                    make_stream(seed, StreamComponent::bit_errors, tag_id)};
}

namespace {

enum class StepStatus { ok, left_beam, lost_power, not_decoded };

/// Walks a reader/tag exchange step by step, checking the tag's link at every
/// step boundary and at the midpoint of each reply.
class Exchange {
 public:
  Exchange(const Gen2Params& p, const LinkFn& link, double t0, TagStreams& streams,
           const BerModel& ber)
      : p_(p), link_(link), streams_(streams), ber_(ber), t_(t0) {
    out_.t_start = t0;
  }

  StepStatus command(Command c, const CommandFields& f, bool preamble_query = false) {
    const BitString bits = command_bits(c, p_, f);
    const double d = reader_transmission_duration(bits, preamble_query || c == Command::query, p_);
    return advance(to_string(c), StepKind::reader_command, d);
  }

  StepStatus gap(std::string_view name, double d, StepKind kind = StepKind::gap,
                 double check_step = 0.0) {
    if (check_step > 0.0 && d > check_step) {
      double remaining = d;
      out_.commands_exchanged.push_back({name, kind, d});
      while (remaining > 0.0) {
        const double dt = std::min(check_step, remaining);
        t_ += dt;
        remaining -= dt;
        const StepStatus s = check(t_);
        if (s != StepStatus::ok) {
          // Charge only the elapsed portion.
          out_.commands_exchanged.back().duration_s = d - remaining;
          return s;
        }
      }
      return StepStatus::ok;
    }
    return advance(name, kind, d);
  }

  StepStatus reply(std::string_view name, int bits, double* snr_out = nullptr) {
    const double d = tag_reply_duration(bits, p_);
    const LinkSample mid = link_(t_ + 0.5 * d);
    const double u = uniform01(streams_.bit_errors);
    out_.commands_exchanged.push_back({name, StepKind::tag_reply, 0.0});
    if (!mid.in_beam || !mid.tag_powered) {
      out_.commands_exchanged.back().duration_s = 0.5 * d;
      t_ += 0.5 * d;
      return mid.in_beam ? StepStatus::lost_power : StepStatus::left_beam;
    }
    out_.commands_exchanged.back().duration_s = d;
    t_ += d;
    const StepStatus s = check(t_);
    if (s != StepStatus::ok) return s;
    const double ps = mid.reader_detects
                          ? reply_success_probability(mid.snr_db, bits, p_.encoding, ber_)
                          : 0.0;
    if (snr_out) *snr_out = mid.snr_db;
    return u < ps ? StepStatus::ok : StepStatus::not_decoded;
  }

  double now() const { return t_; }
  InventoryOutcome& outcome() { return out_; }

  InventoryOutcome finish(OutcomeKind kind) {
    out_.result = kind;
    out_.t_end = t_;
    return std::move(out_);
  }

 private:
  StepStatus advance(std::string_view name, StepKind kind, double d) {
    out_.commands_exchanged.push_back({name, kind, d});
    t_ += d;
    return check(t_);
  }

  StepStatus check(double t) {
    const LinkSample s = link_(t);
    if (!s.in_beam) return StepStatus::left_beam;
    if (!s.tag_powered) return StepStatus::lost_power;
    return StepStatus::ok;
  }

  const Gen2Params& p_;
  const LinkFn& link_;
  TagStreams& streams_;
  const BerModel& ber_;
  double t_;
  InventoryOutcome out_;
};

OutcomeKind failure_kind(StepStatus s) {
  return s == StepStatus::left_beam ? OutcomeKind::truncated_by_exit
                                    : OutcomeKind::link_margin_failure;
}

std::uint16_t draw_rn16(TagStreams& streams) {
  return static_cast<std::uint16_t>(streams.rn16() & 0xFFFFU);
}

/// Runs opener -> RN16 -> ACK -> EPC on `ex`. Returns the terminal outcome,
/// or success with the exchange left open at the end of the trailing T2.
OutcomeKind run_singulation(Exchange& ex, const Gen2Params& p, TagStreams& streams,
                            Command opener, const CommandFields& opener_fields) {
  StepStatus s = ex.command(opener, opener_fields);
  if (s != StepStatus::ok) return failure_kind(s);
  if ((s = ex.gap("T1", p.t1_s())) != StepStatus::ok) return failure_kind(s);
  const std::uint16_t rn = draw_rn16(streams);
  ex.outcome().rn16 = rn;
  s = ex.reply("RN16", p.rn16_bits);
  if (s == StepStatus::not_decoded) {
    ex.gap("T2", p.t2_s());
    return OutcomeKind::ack_timeout;
  }
  if (s != StepStatus::ok) return failure_kind(s);
  if ((s = ex.gap("T2", p.t2_s())) != StepStatus::ok) return failure_kind(s);
  CommandFields ack;
  ack.rn16 = rn;
  if ((s = ex.command(Command::ack, ack)) != StepStatus::ok) return failure_kind(s);
  if ((s = ex.gap("T1", p.t1_s())) != StepStatus::ok) return failure_kind(s);
  double snr = kNegInf;
  s = ex.reply("EPC", p.epc_reply_bits, &snr);
  if (s == StepStatus::not_decoded) {
    ex.gap("T2", p.t2_s());
    ex.command(Command::nak, {});
    return OutcomeKind::decode_failure;
  }
  if (s != StepStatus::ok) return failure_kind(s);
  if ((s = ex.gap("T2", p.t2_s())) != StepStatus::ok) return failure_kind(s);
  ex.outcome().snr_db = snr;
  return OutcomeKind::success;
}

}  // namespace

SingulationResult singulation_attempt(const TagSessionState& state, const Gen2Params& p,
                                      const LinkFn& link, double t_now, TagStreams& streams,
                                      const BerModel& ber, Command opener,
                                      const CommandFields& opener_fields) {
  Exchange ex(p, link, t_now, streams, ber);
  const OutcomeKind kind = run_singulation(ex, p, streams, opener, opener_fields);
  SingulationResult r{ex.finish(kind), state};
  switch (kind) {
    case OutcomeKind::success:
      r.state.inventoried_flag = flipped(state.inventoried_flag);
      r.state.flag_set_at_s = r.outcome.t_end;
      r.state.in_round = false;
      r.state.powered = true;
      break;
    case OutcomeKind::link_margin_failure:
    case OutcomeKind::truncated_by_exit:
      on_power_loss(r.state, p, r.outcome.t_end);
      break;
    default:
      r.state.powered = true;
      break;
  }
  return r;
}

double single_tag_round_duration(const Gen2Params& p, std::uint16_t rn16,
                                 InventoriedFlag target) {
  CommandFields q;
  q.q = 0;
  q.target = target;
  CommandFields ack;
  ack.rn16 = rn16;
  return command_duration(Command::query, p, q) + p.t1_s() +
         tag_reply_duration(p.rn16_bits, p) + p.t2_s() + command_duration(Command::ack, p, ack) +
         p.t1_s() + tag_reply_duration(p.epc_reply_bits, p) + p.t2_s();
}

double idle_slot_duration(Command opener, const Gen2Params& p, const CommandFields& fields) {
  return command_duration(opener, p, fields) + p.t1_s() + p.t3_s();
}

double collision_slot_duration(Command opener, const Gen2Params& p,
                               const CommandFields& fields) {
  return command_duration(opener, p, fields) + p.t1_s() + tag_reply_duration(p.rn16_bits, p) +
         p.t2_s();
}

// ---------------------------------------------------------------------------

namespace {

class InventoryRunner {
 public:
  InventoryRunner(std::size_t tag_count, const Gen2Params& p, const MultiLinkFn& link,
                  std::uint64_t seed, const InventoryOptions& options,
                  const CandidateFn& candidates)
      : p_(p),
        link_(link),
        candidates_(candidates),
        seed_(seed),
        options_(options),
        states_(tag_count),
        streams_(tag_count),
        slot_(tag_count, -1),
        powered_flag_(tag_count, 0) {}

  InventoryResult run(double t_start, double t_end) {
    double t = t_start;
    double qfp = p_.q_init;
    InventoriedFlag target = InventoriedFlag::a;
    std::uint64_t round_index = 0;
    while (t < t_end) {
      int q = static_cast<int>(std::lround(qfp));
      const std::uint64_t this_round = round_index++;
      result_.rounds.push_back({t, this_round, q, target});
      refresh_power(t);
      round_.clear();
      for (std::size_t tag : live_) {
        if (states_[tag].inventoried_flag == target) {
          round_.push_back(tag);
          states_[tag].in_round = true;
        }
      }
      draw_slots(q);
      Command opener = Command::query;
      CommandFields fields;
      fields.q = q;
      fields.target = target;
      int slot = 0;
      while (t < t_end) {
        responders_.clear();
        for (std::size_t tag : round_) {
          if (states_[tag].in_round && slot_[tag] == slot) responders_.push_back(tag);
        }
        // Responders that lost power since the last check drop out.
        std::erase_if(responders_, [&](std::size_t tag) {
          const LinkSample s = link_(tag, t);
          if (s.tag_powered) return false;
          lose_power(tag, t);
          return true;
        });
        double slot_end = t;
        if (responders_.empty()) {
          slot_end = t + idle_slot_duration(opener, p_, fields);
          record_simple(OutcomeKind::idle_slot, t, slot_end, opener, fields, 0);
          qfp = std::max(0.0, qfp - p_.q_step);
        } else if (responders_.size() > 1) {
          slot_end = t + collision_slot_duration(opener, p_, fields);
          for (std::size_t tag : responders_) {
            draw_rn16(streams(tag));
            slot_[tag] = -1;
          }
          record_simple(OutcomeKind::collision, t, slot_end, opener, fields,
                        static_cast<int>(responders_.size()));
          qfp = std::min(15.0, qfp + p_.q_step);
        } else {
          const std::size_t tag = responders_.front();
          const LinkFn single = [&](double tt) { return link_(tag, tt); };
          SingulationResult r = singulation_attempt(states_[tag], p_, single, t, streams(tag),
                                                    options_.ber, opener, fields);
          slot_end = r.outcome.t_end;
          ++result_.histogram[r.outcome.result];
          switch (r.outcome.result) {
            case OutcomeKind::success:
              if (slot_end <= t_end) {
                result_.reads.push_back({slot_end, tag, this_round, r.outcome.snr_db});
              }
              states_[tag] = r.state;
              break;
            case OutcomeKind::link_margin_failure:
            case OutcomeKind::truncated_by_exit:
              states_[tag] = r.state;
              powered_flag_[tag] = 0;
              break;
            default:
              states_[tag] = r.state;
              break;
          }
          slot_[tag] = -1;
          if (options_.record_outcomes) result_.outcomes.push_back(std::move(r.outcome));
        }
        t = slot_end;
        const int new_q = static_cast<int>(std::lround(qfp));
        if (p_.q_adaptive && new_q != q) {
          fields.up_down = new_q > q ? 1 : -1;
          q = new_q;
          opener = Command::query_adjust;
          std::erase_if(round_, [&](std::size_t tag) { return !states_[tag].in_round; });
          draw_slots(q);
          slot = 0;
          continue;
        }
        if (!p_.q_adaptive) qfp = p_.q_init;
        ++slot;
        if (slot >= (1 << q)) break;
        opener = Command::query_rep;
        fields.up_down = 0;
      }
      bool unresolved = false;
      for (std::size_t tag : round_) {
        if (states_[tag].in_round && states_[tag].powered && states_[tag].inventoried_flag == target) {
          unresolved = true;
        }
        states_[tag].in_round = false;
      }
      if (p_.target_mode == TargetMode::dual_target && !unresolved) target = flipped(target);
    }
    result_.t_end = t;
    return std::move(result_);
  }

 private:
  TagStreams& streams(std::size_t tag) {
    if (!streams_[tag]) streams_[tag] = TagStreams::make(seed_, tag);
    return *streams_[tag];
  }

  void lose_power(std::size_t tag, double t) {
    on_power_loss(states_[tag], p_, t);
    powered_flag_[tag] = 0;
    slot_[tag] = -1;
  }

  void refresh_power(double t) {
    candidate_buf_.clear();
    if (candidates_) {
      candidates_(t, candidate_buf_);
    } else {
      candidate_buf_.resize(states_.size());
      for (std::size_t i = 0; i < states_.size(); ++i) candidate_buf_[i] = i;
    }
    next_live_.clear();
    for (std::size_t tag : candidate_buf_) {
      if (tag >= states_.size()) continue;
      const LinkSample s = link_(tag, t);
      if (s.tag_powered) {
        on_powered(states_[tag], p_, t);
        next_live_.push_back(tag);
      }
    }
    for (std::size_t tag : next_live_) powered_flag_[tag] = 2;
    for (std::size_t tag : live_) {
      if (powered_flag_[tag] != 2) lose_power(tag, t);
    }
    for (std::size_t tag : next_live_) powered_flag_[tag] = 1;
    std::sort(next_live_.begin(), next_live_.end());
    next_live_.erase(std::unique(next_live_.begin(), next_live_.end()), next_live_.end());
    live_.swap(next_live_);
  }

  void draw_slots(int q) {
    const std::uint64_t frame = std::uint64_t{1} << q;
    for (std::size_t tag : round_) {
      if (!states_[tag].in_round) continue;
      slot_[tag] = static_cast<int>(streams(tag).slots() % frame);
    }
  }

  void record_simple(OutcomeKind kind, double t0, double t1, Command opener,
                     const CommandFields& fields, int responders) {
    ++result_.histogram[kind];
    if (!options_.record_outcomes) return;
    InventoryOutcome o;
    o.result = kind;
    o.t_start = t0;
    o.t_end = t1;
    o.commands_exchanged.push_back(
        {to_string(opener), StepKind::reader_command, command_duration(opener, p_, fields)});
    o.commands_exchanged.push_back({"T1", StepKind::gap, p_.t1_s()});
    if (responders == 0) {
      o.commands_exchanged.push_back({"T3", StepKind::gap, p_.t3_s()});
    } else {
      o.commands_exchanged.push_back(
          {"RN16", StepKind::tag_reply, tag_reply_duration(p_.rn16_bits, p_)});
      o.commands_exchanged.push_back({"T2", StepKind::gap, p_.t2_s()});
    }
    result_.outcomes.push_back(std::move(o));
  }

  const Gen2Params& p_;
  const MultiLinkFn& link_;
  const CandidateFn& candidates_;
  std::uint64_t seed_;
  InventoryOptions options_;
  std::vector<TagSessionState> states_;
  std::vector<std::optional<TagStreams>> streams_;
  std::vector<int> slot_;
  std::vector<std::uint8_t> powered_flag_;
  std::vector<std::size_t> live_;
  std::vector<std::size_t> next_live_;
  std::vector<std::size_t> candidate_buf_;
  std::vector<std::size_t> round_;
  std::vector<std::size_t> responders_;
  InventoryResult result_;
};

}  // namespace

InventoryResult run_inventory(std::size_t tag_count, const Gen2Params& p, const MultiLinkFn& link,
                              double t_start, double t_end, std::uint64_t seed,
                              const InventoryOptions& options, const CandidateFn& candidates) {
  InventoryRunner runner(tag_count, p, link, seed, options, candidates);
  return runner.run(t_start, t_end);
}

// ---------------------------------------------------------------------------

MemoryReadResult read_user_memory(const TagSessionState& initial, int word_count,
                                  const Gen2Params& p, const LinkFn& link, TagStreams& streams,
                                  double t_start, const MemoryReadOptions& options) {
  if (word_count < 1) throw std::invalid_argument("read_user_memory: word_count must be >= 1");
  if (word_count > 255) throw std::invalid_argument("read_user_memory: word_count must be <= 255");
  MemoryReadResult result;
  TagSessionState state = initial;
  double t = t_start;
  const double deadline = t_start + options.max_duration_s;
  CommandFields idle_query;
  idle_query.q = 0;
  while (result.attempts < options.max_attempts && t < deadline) {
    // Unpowered tags cannot answer; the reader keeps issuing empty rounds.
    LinkSample s = link(t);
    if (!s.tag_powered) {
      on_power_loss(state, p, t);
      idle_query.target = state.inventoried_flag;
      t += idle_slot_duration(Command::query, p, idle_query);
      continue;
    }
    on_powered(state, p, t);
    ++result.attempts;
    Exchange ex(p, link, t, streams, options.ber);
    CommandFields q;
    q.q = 0;
    q.target = state.inventoried_flag;
    OutcomeKind kind = run_singulation(ex, p, streams, Command::query, q);
    if (kind == OutcomeKind::success) {
      StepStatus st = StepStatus::ok;
      if (options.pre_access_processing_s > 0.0) {
        st = ex.gap("processing", options.pre_access_processing_s, StepKind::processing,
                    options.power_check_step_s);
      }
      CommandFields req;
      req.rn16 = ex.outcome().rn16;
      if (st == StepStatus::ok) st = ex.command(Command::req_rn, req);
      if (st == StepStatus::ok) st = ex.gap("T1", p.t1_s());
      const std::uint16_t handle = draw_rn16(streams);
      if (st == StepStatus::ok) st = ex.reply("handle", kHandleReplyBits);
      if (st == StepStatus::ok) st = ex.gap("T2", p.t2_s());
      CommandFields rd;
      rd.rn16 = handle;
      rd.word_count = static_cast<std::uint8_t>(word_count);
      if (st == StepStatus::ok) st = ex.command(Command::read, rd);
      if (st == StepStatus::ok) st = ex.gap("T1", p.t1_s());
      if (st == StepStatus::ok && options.tag_access_delay_s > 0.0) {
        st = ex.gap("access", options.tag_access_delay_s, StepKind::processing,
                    options.power_check_step_s);
      }
      if (st == StepStatus::ok) st = ex.reply("data", read_reply_bits(word_count));
      if (st == StepStatus::ok) st = ex.gap("T2", p.t2_s());
      if (st == StepStatus::not_decoded) {
        kind = OutcomeKind::decode_failure;
      } else if (st != StepStatus::ok) {
        kind = failure_kind(st);
      }
    }
    InventoryOutcome outcome = ex.finish(kind);
    t = outcome.t_end;
    result.attempts_log.push_back(std::move(outcome));
    if (kind == OutcomeKind::success) {
      result.success = true;
      break;
    }
    if (kind == OutcomeKind::link_margin_failure || kind == OutcomeKind::truncated_by_exit) {
      on_power_loss(state, p, t);
    }
  }
  result.duration_s = t - t_start;
  return result;
}

double user_memory_read_duration(const Gen2Params& p, std::uint16_t rn16, std::uint16_t handle,
                                 int word_count, const MemoryReadOptions& options) {
  CommandFields req;
  req.rn16 = rn16;
  CommandFields rd;
  rd.rn16 = handle;
  rd.word_count = static_cast<std::uint8_t>(word_count);
  return single_tag_round_duration(p, rn16, InventoriedFlag::a) +
         options.pre_access_processing_s + command_duration(Command::req_rn, p, req) +
         p.t1_s() + tag_reply_duration(kHandleReplyBits, p) + p.t2_s() +
         command_duration(Command::read, p, rd) + p.t1_s() + options.tag_access_delay_s +
         tag_reply_duration(read_reply_bits(word_count), p) + p.t2_s();
}

}  // namespace reisim
