#pragma once

// EPC Gen 2 air interface: PIE command framing, tag reply timing, the
// Query/RN16/ACK/EPC singulation handshake, Q-adaptive framed slotted Aloha,
// and user-memory Read access.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "reisim/encoding.hpp"
#include "reisim/rflink.hpp"

namespace reisim {

enum class Command { query, query_rep, query_adjust, ack, req_rn, read, nak };
enum class Session { s0, s1, s2, s3 };
enum class TargetMode { single_target, dual_target };
enum class InventoriedFlag { a, b };
enum class PilotTone { automatic, on, off };

std::string_view to_string(Command c);
std::string_view to_string(Session s);
std::string_view to_string(TargetMode m);
std::string_view to_string(PilotTone p);
std::optional<Session> session_from_string(std::string_view s);
std::optional<TargetMode> target_mode_from_string(std::string_view s);
std::optional<PilotTone> pilot_tone_from_string(std::string_view s);

inline InventoriedFlag flipped(InventoriedFlag f) {
  return f == InventoriedFlag::a ? InventoriedFlag::b : InventoriedFlag::a;
}

/// Link parameters. Values left unset are derived from the standard's
/// formulas:
///   rtcal = tari * (1 + data1_ratio)
///   trcal = dr / blf
///   T1    = max(rtcal, 10 / blf)
///   T2    = 10 / blf
///   T3    = 10 / blf
struct Gen2Params {
  double tari_s = 12.5e-6;
  /// Reader data-1 length as a multiple of tari, in [1.5, 2].
  double data1_ratio = 2.0;
  double dr = 64.0 / 3.0;
  double blf_hz = 320e3;
  double delimiter_s = 12.5e-6;
  Encoding encoding = Encoding::fm0;
  /// Automatic means pilot tone on for Miller, off for FM0.
  PilotTone pilot = PilotTone::automatic;
  int q_init = 4;
  double q_step = 0.3;
  bool q_adaptive = true;
  Session session = Session::s0;
  TargetMode target_mode = TargetMode::dual_target;
  /// PC (16) + EPC (96) + CRC-16 (16).
  int epc_reply_bits = 128;
  int rn16_bits = 16;
  /// S1 inventoried-flag persistence.
  double s1_persistence_s = 2.0;

  std::optional<double> rtcal_override_s;
  std::optional<double> trcal_override_s;
  std::optional<double> t1_override_s;
  std::optional<double> t2_override_s;
  std::optional<double> t3_override_s;

  double data1_s() const { return tari_s * data1_ratio; }
  double rtcal_s() const;
  double trcal_s() const;
  double blf() const;
  double tpri_s() const { return 1.0 / blf(); }
  double t1_s() const;
  double t2_s() const;
  double t3_s() const;
  bool trext() const;
  int m() const { return subcarrier_cycles(encoding); }

  void validate() const;
};

using BitString = std::vector<bool>;

/// CRC-5 over the Query payload (x^5 + x^3 + 1, preset 01001).
std::uint8_t crc5(const std::vector<bool>& bits);
/// CRC-16 (x^16 + x^12 + x^5 + 1, preset 0xFFFF, ones-complemented).
std::uint16_t crc16(const std::vector<bool>& bits);

void append_bits(BitString& out, std::uint32_t value, int width);

/// Optional payload fields of a reader command; unused fields are ignored.
struct CommandFields {
  int q = 0;
  InventoriedFlag target = InventoriedFlag::a;
  std::uint16_t rn16 = 0;
  /// QueryAdjust UpDn: +1, 0 or -1.
  int up_down = 0;
  std::uint8_t mem_bank = 0b11;  // user memory
  std::uint32_t word_ptr = 0;
  std::uint8_t word_count = 1;
};

BitString command_bits(Command command, const Gen2Params& p, const CommandFields& fields = {});

/// Delimiter + data-0 + RTcal (+ TRcal for the Query preamble) followed by
/// PIE bits (data-0 = tari, data-1 = data1_ratio * tari).
double reader_transmission_duration(const std::vector<bool>& bits, bool preamble,
                                    const Gen2Params& p);

double command_duration(Command command, const Gen2Params& p, const CommandFields& fields = {});

int reply_preamble_symbols(const Gen2Params& p);

/// (preamble + bits + 1 dummy) * M / BLF.
double tag_reply_duration(int bits, const Gen2Params& p);

int read_reply_bits(int word_count);
inline constexpr int kHandleReplyBits = 32;

// ---------------------------------------------------------------------------
// Protocol state and outcomes.

enum class StepKind { reader_command, tag_reply, gap, processing };

struct ExchangeStep {
  std::string_view name;
  StepKind kind = StepKind::gap;
  double duration_s = 0.0;
};

enum class OutcomeKind {
  success,
  collision,
  idle_slot,
  link_margin_failure,
  truncated_by_exit,
  ack_timeout,
  /// PC/EPC reply failed its CRC; the reader NAKs and the tag keeps its flag.
  decode_failure,
};

std::string_view to_string(OutcomeKind k);

struct InventoryOutcome {
  OutcomeKind result = OutcomeKind::idle_slot;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<ExchangeStep> commands_exchanged;
  std::uint16_t rn16 = 0;
  /// SNR at the temporal midpoint of the EPC reply (successful reads only).
  double snr_db = kNegInf;

  double duration() const { return t_end - t_start; }
};

struct TagSessionState {
  InventoriedFlag inventoried_flag = InventoriedFlag::a;
  bool powered = false;
  bool in_round = false;
  int slot_counter = 0;
  double flag_set_at_s = 0.0;
  double unpowered_since_s = 0.0;
};

/// Applies the session's flag-persistence rule for a tag that has been
/// observed unpowered at time `t`.
void on_power_loss(TagSessionState& state, const Gen2Params& p, double t);
/// Applies persistence expiry for a tag observed powered at time `t`.
void on_powered(TagSessionState& state, const Gen2Params& p, double t);

using LinkFn = std::function<LinkSample(double t)>;

/// Per-tag random streams.
struct TagStreams {
  std::mt19937_64 slots;
  std::mt19937_64 rn16;
  std::mt19937_64 bit_errors;

  static TagStreams make(std::uint64_t seed, std::uint64_t tag_id);
};

struct SingulationResult {
  InventoryOutcome outcome;
  TagSessionState state;
};

/// One tag replying alone in the current slot. The slot is opened by
/// `opener` (Query, QueryRep or QueryAdjust), then RN16 -> ACK -> PC/EPC/CRC.
/// Each reply decodes with probability (1 - BER)^bits at the reply's midpoint SNR.
SingulationResult singulation_attempt(const TagSessionState& state, const Gen2Params& p,
                                      const LinkFn& link, double t_now, TagStreams& streams,
                                      const BerModel& ber = {},
                                      Command opener = Command::query,
                                      const CommandFields& opener_fields = {});

/// Closed-form noiseless duration of one Q = 0 round that singulates a tag
/// whose RN16 is `rn16`: Query + T1 + RN16 + T2 + ACK + T1 + EPC + T2.
double single_tag_round_duration(const Gen2Params& p, std::uint16_t rn16,
                                 InventoriedFlag target = InventoriedFlag::a);

double idle_slot_duration(Command opener, const Gen2Params& p, const CommandFields& fields = {});
double collision_slot_duration(Command opener, const Gen2Params& p,
                               const CommandFields& fields = {});

// ---------------------------------------------------------------------------
// Inventory rounds over a tag population.

struct TagRead {
  double t = 0.0;
  std::size_t tag = 0;
  std::uint64_t round_index = 0;
  double snr_db = kNegInf;
};

struct RoundRecord {
  double t_start = 0.0;
  std::uint64_t round_index = 0;
  int q = 0;
  InventoriedFlag target = InventoriedFlag::a;
};

using MultiLinkFn = std::function<LinkSample(std::size_t tag, double t)>;
/// Fills `out` with the tags worth evaluating at time t. Tags left out are
/// treated as unpowered.
using CandidateFn = std::function<void(double t, std::vector<std::size_t>& out)>;

struct InventoryResult {
  std::vector<TagRead> reads;
  std::vector<RoundRecord> rounds;
  std::map<OutcomeKind, std::uint64_t> histogram;
  /// Only filled when outcome recording is enabled.
  std::vector<InventoryOutcome> outcomes;
  double t_end = 0.0;
};

struct InventoryOptions {
  bool record_outcomes = false;
  BerModel ber;
};

/// Runs Q-adaptive framed slotted Aloha from t_start until t_end. Reads
/// completing after t_end are discarded.
InventoryResult run_inventory(std::size_t tag_count, const Gen2Params& p, const MultiLinkFn& link,
                              double t_start, double t_end, std::uint64_t seed,
                              const InventoryOptions& options = {},
                              const CandidateFn& candidates = {});

// ---------------------------------------------------------------------------
// User-memory access.

struct MemoryReadOptions {
  /// Reader-side processing between the EPC reply and the ReqRN command.
  double pre_access_processing_s = 0.0;
  /// Time between the Read command and the tag's data reply, beyond T1,
  /// during which the tag must stay powered (sensor activation etc.).
  double tag_access_delay_s = 0.0;
  int max_attempts = 50;
  /// Wall-clock budget for waiting on an unpowered tag.
  double max_duration_s = 60.0;
  /// Power is re-checked at this spacing during long waits.
  double power_check_step_s = 1e-3;
  BerModel ber;
};

struct MemoryReadResult {
  double duration_s = 0.0;
  bool success = false;
  int attempts = 0;
  std::vector<InventoryOutcome> attempts_log;
};

/// Singulates a lone tag and reads `word_count` words from user memory via
/// ReqRN + Read. Any power dip or decode failure restarts from Query, with
/// the elapsed time charged. Throws std::invalid_argument when word_count < 1.
MemoryReadResult read_user_memory(const TagSessionState& state, int word_count,
                                  const Gen2Params& p, const LinkFn& link, TagStreams& streams,
                                  double t_start = 0.0, const MemoryReadOptions& options = {});

/// Closed-form duration of a first-try noiseless read_user_memory.
double user_memory_read_duration(const Gen2Params& p, std::uint16_t rn16, std::uint16_t handle,
                                 int word_count, const MemoryReadOptions& options = {});

}  // namespace reisim
