#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace reisim {

/// Tag-to-reader baseband encoding. Miller-M spends M subcarrier cycles per
/// bit, so the tag data rate is BLF / M.
enum class Encoding { fm0, miller2, miller4, miller8 };

inline constexpr std::array<Encoding, 4> kAllEncodings{Encoding::fm0, Encoding::miller2,
                                                       Encoding::miller4, Encoding::miller8};

constexpr int subcarrier_cycles(Encoding e) {
  switch (e) {
    case Encoding::fm0: return 1;
    case Encoding::miller2: return 2;
    case Encoding::miller4: return 4;
    case Encoding::miller8: return 8;
  }
  return 1;
}

constexpr std::string_view to_string(Encoding e) {
  switch (e) {
    case Encoding::fm0: return "FM0";
    case Encoding::miller2: return "Miller2";
    case Encoding::miller4: return "Miller4";
    case Encoding::miller8: return "Miller8";
  }
  return "FM0";
}

constexpr std::optional<Encoding> encoding_from_string(std::string_view s) {
  for (Encoding e : kAllEncodings) {
    if (to_string(e) == s) return e;
  }
  if (s == "fm0") return Encoding::fm0;
  if (s == "miller2" || s == "M2") return Encoding::miller2;
  if (s == "miller4" || s == "M4") return Encoding::miller4;
  if (s == "miller8" || s == "M8") return Encoding::miller8;
  return std::nullopt;
}

}  // namespace reisim
