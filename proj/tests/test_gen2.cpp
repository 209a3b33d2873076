#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "oracles.hpp"
#include "reisim/gen2.hpp"

using namespace reisim;

namespace {

LinkSample perfect(double t) {
  LinkSample s;
  s.t = t;
  s.in_beam = s.tag_powered = s.reader_detects = true;
  s.forward_power_at_tag_dbm = 0.0;
  s.backscatter_power_at_reader_dbm = -40.0;
  s.snr_db = 300.0;
  return s;
}

std::vector<bool> ascii_bits(const std::string& s) {
  std::vector<bool> out;
  for (unsigned char c : s) {
    for (int i = 7; i >= 0; --i) out.push_back((c >> i) & 1U);
  }
  return out;
}

Gen2Params random_params(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    Gen2Params p;
    p.tari_s = 6.25e-6 + u(gen) * 18.75e-6;
    p.data1_ratio = 1.5 + 0.5 * u(gen);
    p.dr = u(gen) < 0.5 ? 8.0 : 64.0 / 3.0;
    p.blf_hz = 40e3 + u(gen) * 600e3;
    p.encoding = kAllEncodings[gen() % 4];
    p.pilot = std::array{PilotTone::automatic, PilotTone::on, PilotTone::off}[gen() % 3];
    p.delimiter_s = 12.5e-6;
    p.q_init = 0;
    p.q_adaptive = false;
    try {
      p.validate();
      return p;
    } catch (const std::exception&) {
    }
  }
}

}  // namespace

TEST_SUITE("gen2") {

TEST_CASE("CRC-16 check value and agreement with long division") {
  CHECK(crc16(ascii_bits("123456789")) == 0xD64E);
  CHECK(oracle::crc16(ascii_bits("123456789")) == 0xD64E);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 300; ++i) {
    std::vector<bool> msg(1 + gen() % 120);
    for (std::size_t j = 0; j < msg.size(); ++j) msg[j] = gen() & 1U;
    CHECK(crc16(msg) == oracle::crc16(msg));
  }
}

TEST_CASE("CRC-5 agrees with long division and leaves a zero residue") {
  std::mt19937_64 gen(2);
  for (int i = 0; i < 300; ++i) {
    std::vector<bool> msg(17);
    for (std::size_t j = 0; j < msg.size(); ++j) msg[j] = gen() & 1U;
    const std::uint8_t c = crc5(msg);
    CHECK(c == oracle::crc5(msg));
    CHECK(c < 32);
    const auto full = oracle::concat(msg, oracle::bits_of(c, 5));
    // Dividing message+crc (with the preset) leaves no remainder.
    CHECK(oracle::poly_remainder(full, 0b01001, 0b101001, 5) == 0);
  }
}

TEST_CASE("command bit counts") {
  Gen2Params p;
  CHECK(command_bits(Command::query, p).size() == 22);
  CHECK(command_bits(Command::query_rep, p).size() == 4);
  CHECK(command_bits(Command::query_adjust, p).size() == 9);
  CHECK(command_bits(Command::ack, p).size() == 18);
  CHECK(command_bits(Command::nak, p).size() == 8);
  CHECK(command_bits(Command::req_rn, p).size() == 40);
  CHECK(command_bits(Command::read, p).size() == 58);
}

TEST_CASE("Query bits match an independently assembled frame") {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 200; ++i) {
    Gen2Params p = random_params(gen);
    p.session = static_cast<Session>(gen() % 4);
    CommandFields f;
    f.q = static_cast<int>(gen() % 16);
    f.target = gen() % 2 ? InventoriedFlag::b : InventoriedFlag::a;
    CHECK(command_bits(Command::query, p, f) ==
          oracle::query_bits(p, f.q, f.target == InventoriedFlag::b));
  }
}

TEST_CASE("QueryRep duration summed by hand") {
  Gen2Params p;
  // delimiter 12.5 + tari 12.5 + RTcal 37.5 + four data-0 symbols of 12.5 (us)
  CHECK(command_duration(Command::query_rep, p) == doctest::Approx(112.5e-6).epsilon(1e-12));
}

TEST_CASE("framing alone for an empty payload") {
  Gen2Params p;
  CHECK(reader_transmission_duration({}, false, p) ==
        doctest::Approx(p.delimiter_s + p.tari_s + p.rtcal_s()));
}

TEST_CASE("doubling tari doubles non-Query commands minus the delimiter") {
  Gen2Params a, b;
  b.tari_s = 2.0 * a.tari_s;
  for (Command c : {Command::query_rep, Command::query_adjust, Command::ack, Command::nak,
                    Command::req_rn, Command::read}) {
    CHECK(command_duration(c, b) - b.delimiter_s ==
          doctest::Approx(2.0 * (command_duration(c, a) - a.delimiter_s)));
  }
}

TEST_CASE("link timing defaults") {
  Gen2Params p;
  CHECK(p.rtcal_s() == doctest::Approx(37.5e-6));
  CHECK(p.rtcal_s() >= 2.5 * p.tari_s);
  CHECK(p.rtcal_s() <= 3.0 * p.tari_s);
  CHECK(p.blf() == doctest::Approx(320e3));
  CHECK(p.t1_s() == doctest::Approx(std::max(p.rtcal_s(), 10.0 / p.blf())));
  CHECK(p.t2_s() == doctest::Approx(10.0 / p.blf()));
  Gen2Params bad;
  bad.q_init = 16;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("tag reply durations") {
  Gen2Params p;
  CHECK(tag_reply_duration(16, p) == doctest::Approx((6.0 + 16 + 1) / 320e3));
  Gen2Params m8 = p;
  m8.encoding = Encoding::miller8;
  const double per_bit_fm0 = tag_reply_duration(17, p) - tag_reply_duration(16, p);
  const double per_bit_m8 = tag_reply_duration(17, m8) - tag_reply_duration(16, m8);
  CHECK(per_bit_m8 == doctest::Approx(8.0 * per_bit_fm0));
  const double epc_part = tag_reply_duration(128, p) - tag_reply_duration(1, p);
  const double rn_part = tag_reply_duration(16, p) - tag_reply_duration(1, p);
  CHECK(epc_part / rn_part == doctest::Approx(127.0 / 15.0));
  CHECK((128.0 * per_bit_fm0) / (16.0 * per_bit_fm0) == doctest::Approx(8.0));
}

TEST_CASE("noiseless single-tag round equals the command-sum oracle") {
  std::mt19937_64 gen(4);
  for (int i = 0; i < 200; ++i) {
    const Gen2Params p = random_params(gen);
    InventoryOptions o;
    o.record_outcomes = true;
    const auto res = run_inventory(
        1, p, [](std::size_t, double t) { return perfect(t); }, 0.0, 0.05, gen(), o);
    REQUIRE(!res.outcomes.empty());
    const InventoryOutcome& first = res.outcomes.front();
    REQUIRE(first.result == OutcomeKind::success);
    const double want = oracle::single_tag_round(p, first.rn16);
    CHECK(std::abs(first.duration() - want) < 1e-6);
    CHECK(single_tag_round_duration(p, first.rn16) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("outcome durations are the sum of their steps") {
  Gen2Params p;
  p.q_init = 2;
  InventoryOptions o;
  o.record_outcomes = true;
  const auto res = run_inventory(
      5, p, [](std::size_t, double t) { return perfect(t); }, 0.0, 0.05, 9, o);
  REQUIRE(res.outcomes.size() > 10);
  for (const auto& out : res.outcomes) {
    double sum = 0.0;
    for (const auto& s : out.commands_exchanged) sum += s.duration_s;
    CHECK(out.t_end > out.t_start);
    CHECK(out.duration() == doctest::Approx(sum).epsilon(1e-12));
  }
}

TEST_CASE("both replies must decode") {
  Gen2Params p;
  double snr[2];
  const int bits[2] = {p.rn16_bits, p.epc_reply_bits};
  for (int k = 0; k < 2; ++k) {
    double lo = -20.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (reply_success_probability(mid, bits[k], p.encoding) < 0.5 ? lo : hi) = mid;
    }
    snr[k] = 0.5 * (lo + hi);
  }
  // Reply windows of a Query-opened slot starting at t = 0.
  const double rn16_end = command_duration(Command::query, p) + p.t1_s() +
                          tag_reply_duration(p.rn16_bits, p);
  const LinkFn link = [&](double t) {
    LinkSample s = perfect(t);
    s.snr_db = t < rn16_end ? snr[0] : snr[1];
    return s;
  };
  const int trials = 10000;
  int ok = 0;
  for (int i = 0; i < trials; ++i) {
    TagStreams streams = TagStreams::make(77, static_cast<std::uint64_t>(i));
    TagSessionState st;
    st.powered = true;
    st.in_round = true;
    const auto r = singulation_attempt(st, p, link, 0.0, streams);
    if (r.outcome.result == OutcomeKind::success) ++ok;
  }
  CHECK(std::abs(static_cast<double>(ok) / trials - 0.25) <= 0.02);
}

TEST_CASE("power loss after RN16 fails the link margin and keeps the flag") {
  Gen2Params p;
  const double rn16_end = command_duration(Command::query, p) + p.t1_s() +
                          tag_reply_duration(p.rn16_bits, p);
  const LinkFn link = [&](double t) {
    LinkSample s = perfect(t);
    if (t > rn16_end + 1e-6) s.tag_powered = s.reader_detects = false;
    return s;
  };
  TagStreams streams = TagStreams::make(1, 0);
  TagSessionState st;
  st.powered = true;
  st.in_round = true;
  const auto r = singulation_attempt(st, p, link, 0.0, streams);
  CHECK(r.outcome.result == OutcomeKind::link_margin_failure);
  CHECK(r.state.inventoried_flag == InventoriedFlag::a);
}

TEST_CASE("success flips the inventoried flag") {
  Gen2Params p;
  TagStreams streams = TagStreams::make(1, 0);
  TagSessionState st;
  st.powered = true;
  st.in_round = true;
  const auto r = singulation_attempt(st, p, perfect, 0.0, streams);
  CHECK(r.outcome.result == OutcomeKind::success);
  CHECK(r.state.inventoried_flag == InventoriedFlag::b);
}

TEST_CASE("session 0 flag resets on power loss") {
  Gen2Params p;
  TagSessionState st;
  st.inventoried_flag = InventoriedFlag::b;
  on_power_loss(st, p, 1.0);
  CHECK(st.inventoried_flag == InventoriedFlag::a);
}

TEST_CASE("no tags gives idle slots only") {
  Gen2Params p;
  const auto res = run_inventory(
      0, p, [](std::size_t, double t) { return perfect(t); }, 0.0, 0.01, 1);
  CHECK(res.reads.empty());
  for (const auto& [k, n] : res.histogram) {
    if (n > 0) CHECK(k == OutcomeKind::idle_slot);
  }
}

TEST_CASE("two tags at Q = 0 collide until Q adapts, then both are read") {
  Gen2Params p;
  p.q_init = 0;
  const auto res = run_inventory(
      2, p, [](std::size_t, double t) { return perfect(t); }, 0.0, 0.05, 3);
  CHECK(res.histogram.at(OutcomeKind::collision) > 0);
  bool seen[2] = {false, false};
  for (const auto& r : res.reads) seen[r.tag] = true;
  CHECK(seen[0]);
  CHECK(seen[1]);

  Gen2Params fixed = p;
  fixed.q_adaptive = false;
  const auto stuck = run_inventory(
      2, fixed, [](std::size_t, double t) { return perfect(t); }, 0.0, 0.05, 3);
  CHECK(stuck.reads.empty());
}

TEST_CASE("dual target re-reads a persistent tag back to back") {
  Gen2Params p;
  p.q_init = 0;
  p.q_adaptive = false;
  const double horizon = 0.2;
  const auto res = run_inventory(
      1, p, [](std::size_t, double t) { return perfect(t); }, 0.0, horizon, 5);
  const double lo = horizon / single_tag_round_duration(p, 0xFFFF, InventoriedFlag::b);
  const double hi = horizon / single_tag_round_duration(p, 0, InventoriedFlag::a);
  CHECK(static_cast<double>(res.reads.size()) >= std::floor(lo) - 1);
  CHECK(static_cast<double>(res.reads.size()) <= std::floor(hi) + 1);

  Gen2Params single = p;
  single.target_mode = TargetMode::single_target;
  const auto once = run_inventory(
      1, single, [](std::size_t, double t) { return perfect(t); }, 0.0, horizon, 5);
  CHECK(once.reads.size() == 1);
}

TEST_CASE("noiseless throughput decreases with Miller order") {
  double prev = 1e9;
  for (Encoding e : kAllEncodings) {
    Gen2Params p;
    p.encoding = e;
    p.q_init = 0;
    const auto res = run_inventory(
        1, p, [](std::size_t, double t) { return perfect(t); }, 0.0, 0.5, 2);
    const double n = static_cast<double>(res.reads.size());
    CHECK(n < prev);
    prev = n;
  }
}

TEST_CASE("user memory read on a strong link") {
  Gen2Params p;
  TagStreams streams = TagStreams::make(1, 0);
  TagSessionState st;
  st.powered = true;
  const auto r = read_user_memory(st, 4, p, perfect, streams);
  CHECK(r.success);
  CHECK(r.attempts == 1);
  REQUIRE(!r.attempts_log.empty());
  CHECK(r.duration_s < 1.0);
  CHECK_THROWS_AS(read_user_memory(st, 0, p, perfect, streams), std::invalid_argument);
}

TEST_CASE("user memory read restarts after a power dip") {
  Gen2Params p;
  TagStreams streams = TagStreams::make(1, 0);
  TagSessionState st;
  st.powered = true;
  // Power drops briefly right after the first Query exchange has started.
  const LinkFn link = [](double t) {
    LinkSample s = perfect(t);
    if (t > 0.8e-3 && t < 5e-3) s.tag_powered = s.reader_detects = false;
    return s;
  };
  const auto r = read_user_memory(st, 4, p, link, streams);
  CHECK(r.success);
  CHECK(r.attempts >= 2);
  CHECK(r.duration_s > 5e-3);
}

}
