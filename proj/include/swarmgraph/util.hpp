#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace swarmgraph {

/// Logit magnitudes are clamped so ln(p) and ln(1-p) stay finite.
inline constexpr double kLogitCap = 15.0;

/// Reserved separator between candidate solutions inside one text payload
/// (ASCII record separator). Payload text must not contain it.
inline constexpr char kSolutionSep = '\x1e';

// ---------------------------------------------------------------------------
// Stable hashing. All replayable randomness in the library derives from these
// so results do not depend on the standard library's std::hash.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace detail {
inline void hash_accum(std::uint64_t& h, std::string_view s) {
  h = splitmix64(h ^ fnv1a64(s));
}
inline void hash_accum(std::uint64_t& h, const std::string& s) {
  hash_accum(h, std::string_view(s));
}
inline void hash_accum(std::uint64_t& h, const char* s) {
  hash_accum(h, std::string_view(s));
}
template <class T, std::enable_if_t<std::is_integral_v<T>, int> = 0>
inline void hash_accum(std::uint64_t& h, T v) {
  h = splitmix64(h ^ static_cast<std::uint64_t>(v));
}
}  // namespace detail

/// Order-sensitive combination of strings and integers into one 64-bit key.
template <class... Ts>
std::uint64_t stable_hash(const Ts&... parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  (detail::hash_accum(h, parts), ...);
  return h;
}

/// Maps a 64-bit hash to [0, 1).
inline double unit_interval(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Seeded generator for a named random stream.
inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

/// Uniform double in [0, 1) drawn portably from the generator.
inline double next_unit(std::mt19937_64& rng) { return unit_interval(rng()); }

/// Uniform index in [0, n) drawn portably from the generator; n must be > 0.
inline std::size_t next_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(next_unit(rng) * static_cast<double>(n)) %
         n;
}

// ---------------------------------------------------------------------------
// Numeric helpers.
// ---------------------------------------------------------------------------

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Inverse of sigmoid; defined for p in (0, 1).
inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double clamp_logit(double x) {
  return std::clamp(x, -kLogitCap, kLogitCap);
}

// ---------------------------------------------------------------------------
// Text helpers.
// ---------------------------------------------------------------------------

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

/// Canonical answer form used by voting and accuracy checks: trimmed and
/// case-folded (ASCII upper).
inline std::string canonical_answer(std::string_view s) {
  std::string out = trim(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::toupper(c));
  });
  return out;
}

/// Splits a multi-solution payload on the reserved separator. An empty
/// payload yields no solutions.
inline std::vector<std::string> split_solutions(const std::string& payload) {
  std::vector<std::string> out;
  if (payload.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = payload.find(kSolutionSep, start);
    if (pos == std::string::npos) {
      out.push_back(payload.substr(start));
      return out;
    }
    out.push_back(payload.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string join_solutions(const std::vector<std::string>& solutions) {
  std::string out;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    if (i > 0) out.push_back(kSolutionSep);
    out += solutions[i];
  }
  return out;
}

}  // namespace swarmgraph
