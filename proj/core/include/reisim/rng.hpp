#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace reisim {

/// Random sub-streams are keyed by (seed, component, index) so that toggling
/// one component never shifts the draws of another.
enum class StreamComponent : std::uint64_t {
  slots = 1,
  rn16 = 2,
  bit_errors = 3,
  shadowing = 4,
  sweep = 5,
  trial = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamComponent component,
                                    std::uint64_t index = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(component));
  return splitmix64(h ^ index);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::mt19937_64 make_stream(std::uint64_t seed, StreamComponent component,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(seed, component, index));
}

/// Uniform draw in [0, 1) that does not depend on the library's
/// distribution implementation.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace reisim
