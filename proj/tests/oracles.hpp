#pragma once

// Reference computations written independently of the library, used to
// cross-check it.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "reisim/gen2.hpp"

namespace oracle {

/// Footprint of a beam on a line at lateral distance l: intersect each edge
/// ray (direction theta +- alpha/2 from the line normal) with the line.
inline double ray_footprint(double l, double alpha, double theta) {
  double xs[2];
  const double edges[2] = {theta - alpha / 2.0, theta + alpha / 2.0};
  for (int i = 0; i < 2; ++i) {
    const double dx = std::sin(edges[i]);
    const double dy = std::cos(edges[i]);
    const double t = l / dy;
    xs[i] = t * dx;
  }
  return xs[1] - xs[0];
}

/// GF(2) long division of msg * x^w, with the register preset folded in as
/// preset * x^len(msg), by the generator (given with its leading term).
inline std::uint32_t poly_remainder(const std::vector<bool>& msg, std::uint32_t preset,
                                    std::uint32_t generator, int w) {
  std::vector<int> dividend(msg.size() + w, 0);
  for (std::size_t i = 0; i < msg.size(); ++i) dividend[i] = msg[i] ? 1 : 0;
  for (int i = 0; i < w; ++i) {
    if ((preset >> (w - 1 - i)) & 1U) dividend[i] ^= 1;
  }
  for (std::size_t i = 0; i + w < dividend.size(); ++i) {
    if (!dividend[i]) continue;
    for (int j = 0; j <= w; ++j) {
      if ((generator >> (w - j)) & 1U) dividend[i + j] ^= 1;
    }
  }
  std::uint32_t r = 0;
  for (int i = 0; i < w; ++i) r = (r << 1) | static_cast<std::uint32_t>(dividend[msg.size() + i]);
  return r;
}

inline std::uint8_t crc5(const std::vector<bool>& bits) {
  return static_cast<std::uint8_t>(poly_remainder(bits, 0b01001, 0b101001, 5));
}

inline std::uint16_t crc16(const std::vector<bool>& bits) {
  return static_cast<std::uint16_t>(~poly_remainder(bits, 0xFFFF, 0x11021, 16) & 0xFFFF);
}

inline std::vector<bool> bits_of(std::uint32_t v, int width) {
  std::vector<bool> out;
  for (int i = width - 1; i >= 0; --i) out.push_back((v >> i) & 1U);
  return out;
}

inline std::vector<bool> concat(std::vector<bool> a, const std::vector<bool>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

struct Link {
  double tari, data1, rtcal, trcal, delim, blf;
  int m;
  bool pilot;
};

inline Link link_of(const reisim::Gen2Params& p) {
  Link k{};
  k.tari = p.tari_s;
  k.data1 = p.tari_s * p.data1_ratio;
  k.rtcal = p.rtcal_override_s ? *p.rtcal_override_s : k.tari + k.data1;
  k.blf = p.blf_hz;
  k.trcal = p.trcal_override_s ? *p.trcal_override_s : p.dr / p.blf_hz;
  k.delim = p.delimiter_s;
  k.m = reisim::subcarrier_cycles(p.encoding);
  k.pilot = p.pilot == reisim::PilotTone::on ||
            (p.pilot == reisim::PilotTone::automatic && p.encoding != reisim::Encoding::fm0);
  return k;
}

inline double pie(const Link& k, const std::vector<bool>& bits, bool query) {
  double t = k.delim + k.tari + k.rtcal + (query ? k.trcal : 0.0);
  for (bool b : bits) t += b ? k.data1 : k.tari;
  return t;
}

/// Query with Sel = all, S0, target A, Q = q.
inline std::vector<bool> query_bits(const reisim::Gen2Params& p, int q, bool target_b) {
  const Link k = link_of(p);
  std::vector<bool> b = bits_of(0b1000, 4);
  b.push_back(p.dr != 8.0);
  const int m_code = k.m == 1 ? 0 : k.m == 2 ? 1 : k.m == 4 ? 2 : 3;
  b = concat(b, bits_of(m_code, 2));
  b.push_back(k.pilot);
  b = concat(b, bits_of(0, 2));
  b = concat(b, bits_of(static_cast<int>(p.session), 2));
  b.push_back(target_b);
  b = concat(b, bits_of(q, 4));
  return concat(b, bits_of(crc5(b), 5));
}

inline double reply(const Link& k, int bits) {
  int pre = k.m == 1 ? (k.pilot ? 18 : 6) : (k.pilot ? 22 : 10);
  return (pre + bits + 1) * k.m / k.blf;
}

inline double t1(const Link& k) { return std::max(k.rtcal, 10.0 / k.blf); }
inline double t2(const Link& k) { return 10.0 / k.blf; }

/// Query + T1 + RN16 + T2 + ACK + T1 + PC/EPC/CRC + T2.
inline double single_tag_round(const reisim::Gen2Params& p, std::uint16_t rn16) {
  const Link k = link_of(p);
  const double ack = pie(k, concat(bits_of(0b01, 2), bits_of(rn16, 16)), false);
  return pie(k, query_bits(p, 0, false), true) + t1(k) + reply(k, p.rn16_bits) + t2(k) + ack +
         t1(k) + reply(k, p.epc_reply_bits) + t2(k);
}

/// Log-likelihood of the two-sided binomial model, computed from scratch.
inline double binom_loglik(std::uint64_t z, std::uint64_t n, double p) {
  const double eps = 1e-12;
  p = std::min(1.0 - eps, std::max(eps, p));
  return std::lgamma(n + 1.0) - std::lgamma(z + 1.0) - std::lgamma(n - z + 1.0) +
         z * std::log(p) + (n - z) * std::log1p(-p);
}

}  // namespace oracle
